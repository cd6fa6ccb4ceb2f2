#include "uvlp/embedder/retrieval.hpp"

#include <algorithm>
#include <iostream>
#include <queue>
#include <stdexcept>

namespace uvlp {

RetrievalIndex::RetrievalIndex(std::vector<std::int64_t> ids, std::vector<float> embeddings,
                               std::size_t dim, std::string provider_name)
    : ids_(std::move(ids)),
      embeddings_(std::move(embeddings)),
      dim_(dim),
      provider_(std::move(provider_name)),
      built_at_(std::chrono::system_clock::now()) {
  if (embeddings_.size() != ids_.size() * dim_) {
    throw std::invalid_argument("retrieval index: " + std::to_string(embeddings_.size()) +
                                " floats for " + std::to_string(ids_.size()) + " candidates of dim " +
                                std::to_string(dim_));
  }
}

RetrievalIndex RetrievalIndex::build(const std::vector<std::int64_t>& ids,
                                     const std::vector<std::string>& texts,
                                     const EmbeddingProvider& provider) {
  if (ids.size() != texts.size()) throw std::invalid_argument("retrieval index: ids/texts size mismatch");
  std::vector<float> emb;
  emb.reserve(ids.size() * provider.dim());
  for (const auto& t : texts) {
    auto v = provider.embed(t);
    emb.insert(emb.end(), v.begin(), v.end());
  }
  return RetrievalIndex(ids, std::move(emb), provider.dim(), provider.name());
}

double RetrievalIndex::score(std::span<const float> query, std::size_t row) const {
  const float* c = embeddings_.data() + row * dim_;
  double dot = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) dot += static_cast<double>(query[j]) * c[j];
  // Unit vectors stored in float can overshoot by a few ulps.
  return std::clamp(dot, -1.0, 1.0);
}

std::vector<ScoredId> retrieve_topk(std::span<const float> query, const RetrievalIndex& index,
                                    std::size_t k) {
  if (k == 0) throw std::invalid_argument("retrieve_topk: K must be >= 1");
  if (index.size() == 0) throw std::invalid_argument("retrieve_topk: empty index");
  if (query.size() != index.dim()) {
    throw std::invalid_argument("retrieve_topk: query dim " + std::to_string(query.size()) +
                                " != index dim " + std::to_string(index.dim()));
  }
  // Heap top is the worst kept candidate.
  std::priority_queue<ScoredId, std::vector<ScoredId>, decltype(&ranks_before)> heap(ranks_before);
  for (std::size_t row = 0; row < index.size(); ++row) {
    ScoredId cand{index.id(row), index.score(query, row)};
    if (heap.size() < k) {
      heap.push(cand);
    } else if (ranks_before(cand, heap.top())) {
      heap.pop();
      heap.push(cand);
    }
  }
  std::vector<ScoredId> out;
  out.reserve(heap.size());
  while (!heap.empty()) {
    out.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

WeakCorpus build_weak_corpus(const std::vector<RegionSet>& images, const RetrievalIndex& index,
                             const EmbeddingProvider& provider, std::size_t k) {
  if (index.provider_name() != provider.name()) {
    throw std::invalid_argument("build_weak_corpus: index built with provider '" +
                                index.provider_name() + "', querying with '" + provider.name() + "'");
  }
  WeakCorpus corpus;
  for (const auto& img : images) {
    std::vector<std::string> tags;
    for (const auto& r : img.regions)
      if (!r.tag.empty()) tags.push_back(r.tag);
    if (tags.empty()) {
      std::cerr << "warning: image " << img.image_id << " has no tags, skipped\n";
      corpus.skipped_images.push_back(img.image_id);
      continue;
    }
    const auto query = embed_tag_query(tags, provider);
    const auto hits = retrieve_topk(query, index, k);
    for (std::size_t r = 0; r < hits.size(); ++r) {
      WeakPair p;
      p.image_id = img.image_id;
      p.text_id = hits[r].id;
      p.rank = r + 1;
      p.score = hits[r].score;
      p.label = 1;
      corpus.pairs.push_back(std::move(p));
    }
  }
  return corpus;
}

}  // namespace uvlp
