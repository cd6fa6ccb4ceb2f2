#include "uvlp/embedder/provider.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uvlp/aligner/vocabulary.hpp"

namespace uvlp {
namespace {

void normalize(std::vector<float>& v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  const double norm = std::sqrt(sq);
  for (float& x : v) x = static_cast<float>(x / norm);
}

}  // namespace

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ull ^ seed;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

BagOfWordsProvider::BagOfWordsProvider(std::vector<std::string> vocabulary) {
  for (auto& w : vocabulary) {
    for (auto& tok : tokenize(w)) {
      if (index_.contains(tok)) continue;
      index_.emplace(tok, words_.size());
      words_.push_back(std::move(tok));
    }
  }
}

std::size_t BagOfWordsProvider::coordinate(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? words_.size() : it->second;
}

std::vector<float> BagOfWordsProvider::embed(std::string_view text) const {
  const auto words = tokenize(text);
  if (words.empty()) throw std::invalid_argument("bow provider: empty text");
  std::vector<float> v(dim(), 0.0f);
  bool any = false;
  for (const auto& w : words) {
    const std::size_t c = coordinate(w);
    if (c == words_.size()) continue;
    v[c] += 1.0f;
    any = true;
  }
  if (!any) v.back() = 1.0f;
  normalize(v);
  return v;
}

HashingProvider::HashingProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim_ == 0) throw std::invalid_argument("hash provider: dim must be >= 1");
}

std::vector<float> HashingProvider::embed(std::string_view text) const {
  const auto words = tokenize(text);
  if (words.empty()) throw std::invalid_argument("hash provider: empty text");
  std::vector<float> v(dim_, 0.0f);
  for (const auto& w : words) v[fnv1a(w, seed_) % dim_] += 1.0f;
  normalize(v);
  return v;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine: dimension mismatch " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<float> embed_tag_query(const std::vector<std::string>& tags,
                                   const EmbeddingProvider& provider) {
  if (tags.empty()) throw std::invalid_argument("embed_tag_query: empty tag list");
  std::string joined;
  for (const auto& t : tags) {
    if (!joined.empty()) joined += ' ';
    joined += t;
  }
  return provider.embed(joined);
}

}  // namespace uvlp
