#include "uvlp/aligner/linker.hpp"

#include <cmath>
#include <random>

#include "uvlp/aligner/vocabulary.hpp"
#include "uvlp/embedder/provider.hpp"
#include "uvlp/numkernel/random.hpp"

namespace uvlp {
namespace {

bool is_zero(const std::vector<float>& v) {
  for (float x : v)
    if (x != 0.0f) return false;
  return true;
}

void accumulate(std::vector<float>& acc, const std::vector<float>& v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

}  // namespace

OneHotWordEmbedder::OneHotWordEmbedder(std::vector<std::string> words) : words_(std::move(words)) {}

std::vector<float> OneHotWordEmbedder::embed_word(std::string_view word) const {
  std::vector<float> v(words_.size(), 0.0f);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] == word) {
      v[i] = 1.0f;
      break;
    }
  }
  return v;
}

HashedWordEmbedder::HashedWordEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}

std::vector<float> HashedWordEmbedder::embed_word(std::string_view word) const {
  Rng rng(mix64(fnv1a(word, seed_)));
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> v(dim_);
  for (auto& x : v) x = normal(rng);
  return v;
}

std::vector<float> embed_phrase(const std::vector<std::string>& words, Span span,
                                const WordEmbedder& embedder, const Lexicon& lexicon) {
  std::vector<float> acc(embedder.dim(), 0.0f);
  for (std::size_t i = span.start; i < span.end && i < words.size(); ++i) {
    const Pos pos = lexicon.tag(words[i]);
    if (pos != Pos::Adjective && pos != Pos::Noun) continue;
    accumulate(acc, embedder.embed_word(words[i]));
  }
  return acc;
}

std::vector<PhraseLink> link_phrases(const Sentence& sentence, const RegionSet& regions,
                                     const WordEmbedder& embedder, const Lexicon& lexicon) {
  std::vector<PhraseLink> links;
  if (sentence.noun_phrases.empty() || regions.regions.empty()) return links;

  std::vector<std::vector<float>> tag_vecs;
  tag_vecs.reserve(regions.size());
  for (const auto& r : regions.regions) {
    std::vector<float> acc(embedder.dim(), 0.0f);
    for (const auto& w : tokenize(r.tag)) accumulate(acc, embedder.embed_word(w));
    tag_vecs.push_back(std::move(acc));
  }

  for (const Span& span : sentence.noun_phrases) {
    const auto pv = embed_phrase(sentence.words, span, embedder, lexicon);
    if (is_zero(pv)) continue;
    double best = -2.0;
    std::size_t best_region = 0;
    for (std::size_t r = 0; r < tag_vecs.size(); ++r) {
      if (is_zero(tag_vecs[r])) continue;
      const double c = cosine(pv, tag_vecs[r]);
      if (c > best) {
        best = c;
        best_region = r;
      }
    }
    const double score = std::max(0.0, best);
    if (score > 0.0) links.push_back({span, best_region, score});
  }
  return links;
}

}  // namespace uvlp
