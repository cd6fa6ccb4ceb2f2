#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "uvlp/aligner/lexicon.hpp"
#include "uvlp/aligner/types.hpp"

namespace uvlp {

/// Word-vector source for phrase-to-tag similarity.
class WordEmbedder {
 public:
  virtual ~WordEmbedder() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  /// Vector for a single lowercase word; all-zero for unknown words.
  virtual std::vector<float> embed_word(std::string_view word) const = 0;
};

/// One-hot over a fixed word list.
class OneHotWordEmbedder final : public WordEmbedder {
 public:
  explicit OneHotWordEmbedder(std::vector<std::string> words);
  std::string name() const override { return "onehot"; }
  std::size_t dim() const override { return words_.size(); }
  std::vector<float> embed_word(std::string_view word) const override;

 private:
  std::vector<std::string> words_;
};

/// Pseudo-random Gaussian vector per word, seeded by an FNV-1a hash of the word.
/// Distinct words are nearly orthogonal for large dim.
class HashedWordEmbedder final : public WordEmbedder {
 public:
  HashedWordEmbedder(std::size_t dim, std::uint64_t seed);
  std::string name() const override { return "hashed"; }
  std::size_t dim() const override { return dim_; }
  std::vector<float> embed_word(std::string_view word) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// Mean of the phrase's content-word vectors (determiners and unknown
/// part-of-speech words excluded). All-zero when nothing is known.
std::vector<float> embed_phrase(const std::vector<std::string>& words, Span span,
                                const WordEmbedder& embedder, const Lexicon& lexicon);

/// Links each noun phrase to its most similar region tag. Ties go to the
/// lowest region index; score = max(0, cosine). Links scoring 0 are dropped.
std::vector<PhraseLink> link_phrases(const Sentence& sentence, const RegionSet& regions,
                                     const WordEmbedder& embedder,
                                     const Lexicon& lexicon = Lexicon::builtin());

}  // namespace uvlp
