#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uvlp/aligner/types.hpp"
#include "uvlp/embedder/provider.hpp"

namespace uvlp {

struct ScoredId {
  std::int64_t id = 0;
  double score = 0;
  bool operator==(const ScoredId&) const = default;
};

/// Ranking order used everywhere: higher score first, ties by ascending id.
inline bool ranks_before(const ScoredId& a, const ScoredId& b) {
  return a.score > b.score || (a.score == b.score && a.id < b.id);
}

/// Exhaustive cosine index over unit-norm candidate embeddings. Immutable
/// after build; a query costs O(size · dim).
class RetrievalIndex {
 public:
  RetrievalIndex(std::vector<std::int64_t> ids, std::vector<float> embeddings, std::size_t dim,
                 std::string provider_name);

  /// Embeds every (id, text) candidate with `provider`.
  static RetrievalIndex build(const std::vector<std::int64_t>& ids,
                              const std::vector<std::string>& texts,
                              const EmbeddingProvider& provider);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  const std::string& provider_name() const { return provider_; }
  std::chrono::system_clock::time_point built_at() const { return built_at_; }
  std::int64_t id(std::size_t row) const { return ids_[row]; }
  std::span<const float> embedding(std::size_t row) const {
    return {embeddings_.data() + row * dim_, dim_};
  }

  /// Cosine of a unit query against candidate `row` (dot product in double).
  double score(std::span<const float> query, std::size_t row) const;

 private:
  std::vector<std::int64_t> ids_;
  std::vector<float> embeddings_;
  std::size_t dim_;
  std::string provider_;
  std::chrono::system_clock::time_point built_at_;
};

/// Top-K candidates in ranks_before order; returns min(K, size) entries.
std::vector<ScoredId> retrieve_topk(std::span<const float> query, const RetrievalIndex& index,
                                    std::size_t k);

struct WeakCorpus {
  std::vector<WeakPair> pairs;
  std::vector<std::int64_t> skipped_images;  // images without any tag
};

/// For each image, queries with its region tags and keeps the top-K texts as
/// weak pairs (rank 1..K, label 1). Links are left empty; see link_phrases.
WeakCorpus build_weak_corpus(const std::vector<RegionSet>& images, const RetrievalIndex& index,
                             const EmbeddingProvider& provider, std::size_t k);

}  // namespace uvlp
