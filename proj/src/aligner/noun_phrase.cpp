#include "uvlp/aligner/noun_phrase.hpp"

namespace uvlp {

std::vector<Span> extract_noun_phrases(const std::vector<Pos>& tags) {
  std::vector<Span> spans;
  const std::size_t n = tags.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    if (tags[j] == Pos::Determiner) ++j;
    while (j < n && tags[j] == Pos::Adjective) ++j;
    std::size_t k = j;
    while (k < n && tags[k] == Pos::Noun) ++k;
    if (k > j) {
      spans.push_back({i, k});
      i = k;
    } else {
      ++i;
    }
  }
  return spans;
}

Sentence make_sentence(std::int64_t text_id, std::string text, const Vocabulary& vocab,
                       const Lexicon& lexicon) {
  Sentence s;
  s.text_id = text_id;
  s.words = tokenize(text);
  s.text = std::move(text);
  s.token_ids = vocab.encode(s.words);
  s.noun_phrases = extract_noun_phrases(lexicon.tag(s.words));
  return s;
}

}  // namespace uvlp
