#pragma once

#include <string>
#include <vector>

#include "uvlp/aligner/lexicon.hpp"
#include "uvlp/aligner/types.hpp"
#include "uvlp/aligner/vocabulary.hpp"

namespace uvlp {

/// Rule chunker: maximal (determiner? adjective* noun+) runs, scanned left to
/// right without overlap.
std::vector<Span> extract_noun_phrases(const std::vector<Pos>& tags);

/// Tokenizes, encodes and chunks a raw sentence.
Sentence make_sentence(std::int64_t text_id, std::string text, const Vocabulary& vocab,
                       const Lexicon& lexicon = Lexicon::builtin());

}  // namespace uvlp
