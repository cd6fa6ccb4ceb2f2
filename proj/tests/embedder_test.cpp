#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "uvlp/corpus/dataset_io.hpp"
#include "uvlp/embedder/provider.hpp"
#include "uvlp/embedder/retrieval.hpp"

using namespace uvlp;

namespace {

double norm2(const std::vector<float>& v) {
  double s = 0;
  for (float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

/// Independent ranking: full score table in double, clamped like a cosine,
/// sorted by (score desc, id asc), truncated.
std::vector<ScoredId> brute_force(const std::vector<float>& q, const std::vector<std::int64_t>& ids,
                                  const std::vector<float>& emb, std::size_t dim, std::size_t k) {
  std::vector<ScoredId> all;
  for (std::size_t r = 0; r < ids.size(); ++r) {
    double dot = 0;
    for (std::size_t j = 0; j < dim; ++j) dot += static_cast<double>(q[j]) * emb[r * dim + j];
    all.push_back({ids[r], std::clamp(dot, -1.0, 1.0)});
  }
  std::sort(all.begin(), all.end(), [](const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

std::vector<float> unit(std::vector<float> v) {
  const double n = norm2(v);
  for (auto& x : v) x = static_cast<float>(x / n);
  return v;
}

}  // namespace

TEST_SUITE("embedder") {

TEST_CASE("bag-of-words provider") {
  const BagOfWordsProvider p({"woman", "sofa", "couch", "dog"});
  CHECK(p.dim() == 5);

  SUBCASE("single tag is a basis direction") {
    const auto v = embed_tag_query({"dog"}, p);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == (i == p.coordinate("dog") ? 1.0f : 0.0f));
    CHECK(embed_tag_query({"dog", "dog"}, p) == v);
  }
  SUBCASE("tag query prefers the related sentence") {
    const auto q = embed_tag_query({"woman", "sofa", "couch"}, p);
    const double related = cosine(q, p.embed("young woman seated on a couch"));
    const double unrelated = cosine(q, p.embed("a dog ran away"));
    // (1,1,1,0)/√3 · (1,0,1,0)/√2
    CHECK(related == doctest::Approx(2.0 / std::sqrt(6.0)).epsilon(1e-6));
    CHECK(unrelated == doctest::Approx(0.0));
    CHECK(related > unrelated);
  }
  SUBCASE("unit norm and determinism") {
    for (const char* s : {"Dog", "the couch and the sofa", "nothing known here", "dog dog woman"}) {
      CHECK(std::abs(norm2(p.embed(s)) - 1.0) < 1e-6);
      CHECK(p.embed(s) == p.embed(s));
    }
    const auto oov = p.embed("zebra");
    CHECK(oov.back() == 1.0f);
  }
  CHECK_THROWS_AS(embed_tag_query({}, p), std::invalid_argument);
}

TEST_CASE("hashing provider") {
  const HashingProvider p(64, 3);
  for (const char* s : {"a", "a red ball", "zebra crossing the road at night"}) {
    CHECK(std::abs(norm2(p.embed(s)) - 1.0) < 1e-6);
    CHECK(p.embed(s) == p.embed(s));
  }
  CHECK(p.embed("dog") != HashingProvider(64, 4).embed("dog"));
}

TEST_CASE("cosine") {
  const std::vector<float> v{0.3f, -1.2f, 2.0f};
  const std::vector<float> neg{-0.3f, 1.2f, -2.0f};
  CHECK(cosine(v, v) == doctest::Approx(1.0));
  CHECK(cosine(v, neg) == doctest::Approx(-1.0));
  CHECK(cosine(std::vector<float>{1, 0}, std::vector<float>{1, 1}) == doctest::Approx(0.70710678).epsilon(1e-6));
  CHECK_THROWS_AS(cosine(std::vector<float>{0, 0}, std::vector<float>{1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(cosine(std::vector<float>{1, 0}, std::vector<float>{1, 1, 1}), std::invalid_argument);

  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    std::vector<float> a(8), b(8);
    for (auto& x : a) x = static_cast<float>(uniform01(rng) - 0.5);
    for (auto& x : b) x = static_cast<float>(uniform01(rng) - 0.5);
    CHECK(std::abs(cosine(a, b) - cosine(b, a)) < 1e-7);
  }
}

TEST_CASE("top-K equals a brute-force ranking on random instances") {
  Rng rng(2024);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 30);
    const std::size_t dim = 1 + uniform_index(rng, 5);
    const std::size_t k = 1 + uniform_index(rng, 12);
    std::vector<std::int64_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<std::int64_t>(i * 3 + uniform_index(rng, 3));
    std::shuffle(ids.begin(), ids.end(), rng);
    // Small integer coordinates make exact score ties common.
    auto draw = [&] {
      std::vector<float> v(dim);
      do {
        for (auto& x : v) x = static_cast<float>(uniform_index(rng, 3)) - 1.0f;
      } while (norm2(v) == 0);
      return unit(v);
    };
    std::vector<float> emb;
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = draw();
      emb.insert(emb.end(), v.begin(), v.end());
    }
    const RetrievalIndex index(ids, emb, dim, "test");
    const auto q = draw();
    if (retrieve_topk(q, index, k) != brute_force(q, ids, emb, dim, k)) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("K larger than the index returns everything in order") {
  const BagOfWordsProvider p({"cat", "dog"});
  const auto index = RetrievalIndex::build({7, 3, 5}, {"cat", "dog", "cat dog"}, p);
  const auto top = retrieve_topk(p.embed("cat"), index, 10);
  REQUIRE(top.size() == 3);
  CHECK(top[0].id == 7);
  CHECK(top[1].id == 5);
  CHECK(top[2].id == 3);
  CHECK(top[0].score >= top[1].score);
  CHECK(top[1].score >= top[2].score);
  CHECK(index.size() == 3);
  CHECK(index.provider_name() == "bow");
}

TEST_CASE("weak corpus construction") {
  const World w = generate_world(test::small_world(4));
  const auto images = world_images(w, false);
  const auto texts = world_texts(w, false);
  const BagOfWordsProvider p(images.classes);
  std::vector<std::int64_t> ids;
  std::vector<std::string> raw;
  for (const auto& s : texts.sentences) {
    ids.push_back(s.text_id);
    raw.push_back(s.text);
  }
  const auto index = RetrievalIndex::build(ids, raw, p);

  auto imgs = images.images;
  imgs[3].regions.clear();
  const auto k5 = build_weak_corpus(imgs, index, p, 5);
  const auto k1 = build_weak_corpus(imgs, index, p, 1);
  CHECK(k5.skipped_images == std::vector<std::int64_t>{imgs[3].image_id});
  CHECK(k5.pairs.size() == (imgs.size() - 1) * 5);
  CHECK(k1.pairs.size() == imgs.size() - 1);
  for (std::size_t i = 0; i < k1.pairs.size(); ++i) {
    CHECK(k1.pairs[i] == k5.pairs[i * 5]);
    for (std::size_t r = 0; r < 5; ++r) {
      CHECK(k5.pairs[i * 5 + r].rank == r + 1);
      CHECK(k5.pairs[i * 5 + r].label == 1);
      CHECK(k5.pairs[i * 5 + r].image_id == k1.pairs[i].image_id);
    }
  }
  CHECK(build_weak_corpus(imgs, index, p, 5).pairs == k5.pairs);

  SUBCASE("planted caption is rank 1 for every image") {
    const auto full = build_weak_corpus(images.images, index, p, 1);
    std::size_t hits = 0;
    for (const auto& pair : full.pairs)
      for (const auto& t : w.truth)
        if (!t.heldout && t.image_id == pair.image_id && t.text_id == pair.text_id) ++hits;
    CHECK(hits == images.images.size());
  }
}

}  // TEST_SUITE
