#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace uvlp {

/// Text → unit-norm vector of fixed dimension. Implementations must be
/// deterministic and return ‖v‖₂ = 1 for any non-empty input.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::vector<float> embed(std::string_view text) const = 0;
};

/// Lowercase bag of words over a fixed vocabulary, ℓ₂-normalized. Words
/// outside the vocabulary are ignored; a text with no vocabulary word maps to
/// the reserved out-of-vocabulary direction (the last coordinate).
class BagOfWordsProvider final : public EmbeddingProvider {
 public:
  explicit BagOfWordsProvider(std::vector<std::string> vocabulary);
  std::string name() const override { return "bow"; }
  std::size_t dim() const override { return words_.size() + 1; }
  std::vector<float> embed(std::string_view text) const override;

  /// Coordinate of `word`, or dim()-1 when out of vocabulary.
  std::size_t coordinate(std::string_view word) const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Feature hashing of every word into `dim` buckets (FNV-1a), ℓ₂-normalized.
/// Open vocabulary; collisions only merge counts, so the norm never vanishes.
class HashingProvider final : public EmbeddingProvider {
 public:
  HashingProvider(std::size_t dim, std::uint64_t seed = 0);
  std::string name() const override { return "hash"; }
  std::size_t dim() const override { return dim_; }
  std::vector<float> embed(std::string_view text) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0);

/// a·b / (‖a‖‖b‖), accumulated in double. Throws std::invalid_argument on a
/// dimension mismatch or a zero vector.
double cosine(std::span<const float> a, std::span<const float> b);

/// Embeds an ordered tag list as one space-joined query. Throws on an empty list.
std::vector<float> embed_tag_query(const std::vector<std::string>& tags,
                                   const EmbeddingProvider& provider);

}  // namespace uvlp
