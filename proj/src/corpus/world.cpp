#include "uvlp/corpus/world.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "uvlp/aligner/lexicon.hpp"
#include "uvlp/numkernel/random.hpp"

namespace uvlp {
namespace {

constexpr const char* kOpeners[] = {"", "there is", "here is", "we can see"};
constexpr const char* kConnectors[] = {"near", "beside", "with", "and", "behind", "under", "by", "on"};

std::vector<std::size_t> sample_concepts(Rng& rng, std::size_t pool, std::size_t count) {
  std::vector<std::size_t> all(pool);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) std::swap(all[i], all[i + uniform_index(rng, pool - i)]);
  all.resize(count);
  return all;
}

std::size_t sample_count(Rng& rng, const WorldSpec& spec) {
  return spec.min_concepts + uniform_index(rng, spec.max_concepts - spec.min_concepts + 1);
}

struct Caption {
  std::string text;
  std::vector<Span> spans;  // one per concept, in `order`
};

/// opener? NP (connector NP)*, NP = det adj? noun.
Caption make_caption(Rng& rng, const WorldSpec& spec, const std::vector<std::string>& names,
                     const std::vector<std::size_t>& order) {
  const auto adjectives = Lexicon::builtin_adjectives();
  std::vector<std::string> words;
  const std::string opener = kOpeners[uniform_index(rng, std::size(kOpeners))];
  for (std::size_t p = 0, q; p < opener.size(); p = q + 1) {
    q = opener.find(' ', p);
    if (q == std::string::npos) q = opener.size();
    if (q > p) words.push_back(opener.substr(p, q - p));
  }
  Caption c;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0) words.emplace_back(kConnectors[uniform_index(rng, std::size(kConnectors))]);
    Span s{words.size(), 0};
    words.emplace_back(uniform01(rng) < 0.5 ? "a" : "the");
    if (uniform01(rng) < spec.adjective_prob)
      words.emplace_back(adjectives[uniform_index(rng, adjectives.size())]);
    words.push_back(names[order[i]]);
    s.end = words.size();
    c.spans.push_back(s);
  }
  for (std::size_t i = 0; i < words.size(); ++i) c.text += (i ? " " : "") + words[i];
  return c;
}

}  // namespace

void WorldSpec::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("world spec: " + m); };
  if (concepts < 2) fail("concepts must be >= 2");
  if (concepts > Lexicon::builtin_nouns().size())
    fail("concepts exceeds the " + std::to_string(Lexicon::builtin_nouns().size()) + " built-in nouns");
  if (region_dim == 0) fail("region_dim must be >= 1");
  if (!(noise_sigma >= 0)) fail("noise_sigma must be >= 0");
  if (min_concepts == 0 || min_concepts > max_concepts) fail("need 1 <= min_concepts <= max_concepts");
  if (max_concepts > concepts) fail("max_concepts exceeds concepts");
  if (images + heldout_images == 0) fail("no images requested");
  if (adjective_prob < 0 || adjective_prob > 1) fail("adjective_prob must lie in [0,1]");
}

World generate_world(const WorldSpec& spec) {
  spec.validate();
  World w;
  const auto nouns = Lexicon::builtin_nouns();
  for (std::size_t c = 0; c < spec.concepts; ++c) w.classes.emplace_back(nouns[c]);

  Rng proto_rng(derive_seed(spec.seed, {0}));
  std::normal_distribution<double> normal(0.0, 1.0);
  w.prototypes.assign(spec.concepts, std::vector<float>(spec.region_dim));
  for (auto& p : w.prototypes)
    for (auto& x : p) x = static_cast<float>(normal(proto_rng));

  Rng rng(derive_seed(spec.seed, {1}));
  std::set<std::vector<std::size_t>> used_sets;
  auto fresh_set = [&](std::size_t count) {
    // Bounded retries; tiny concept pools may not have enough distinct sets.
    for (int attempt = 0; attempt < 1000; ++attempt) {
      auto s = sample_concepts(rng, spec.concepts, count);
      auto key = s;
      std::sort(key.begin(), key.end());
      if (used_sets.insert(key).second) return s;
    }
    throw std::invalid_argument("world spec: too few concepts for the requested number of distinct images");
  };

  auto make_image = [&](std::int64_t id, const std::vector<std::size_t>& concepts) {
    RegionSet img;
    img.image_id = id;
    img.width = static_cast<float>(200 + uniform_index(rng, 441));
    img.height = static_cast<float>(200 + uniform_index(rng, 441));
    for (std::size_t c : concepts) {
      Region r;
      r.feature = w.prototypes[c];
      for (auto& x : r.feature) x = static_cast<float>(x + spec.noise_sigma * normal(rng));
      const auto bw = static_cast<float>(std::floor(img.width * (0.1 + 0.4 * uniform01(rng))));
      const auto bh = static_cast<float>(std::floor(img.height * (0.1 + 0.4 * uniform01(rng))));
      r.box.x1 = static_cast<float>(std::floor(uniform01(rng) * (img.width - bw)));
      r.box.y1 = static_cast<float>(std::floor(uniform01(rng) * (img.height - bh)));
      r.box.x2 = r.box.x1 + bw;
      r.box.y2 = r.box.y1 + bh;
      r.tag = w.classes[c];
      r.class_id = c;
      r.confidence = static_cast<float>(std::round((0.5 + 0.5 * uniform01(rng)) * 1000.0) / 1000.0);
      img.regions.push_back(std::move(r));
    }
    return img;
  };

  // Planted caption of an image: its concepts in shuffled order.
  auto plant = [&](const RegionSet& img, TruthRecord& rec) {
    std::vector<std::size_t> order(img.regions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> concepts;
    for (std::size_t r : order) concepts.push_back(img.regions[r].class_id);
    Caption cap = make_caption(rng, spec, w.classes, concepts);
    for (std::size_t i = 0; i < order.size(); ++i) rec.phrases.push_back({cap.spans[i], order[i]});
    return cap.text;
  };

  std::vector<std::string> captions;
  for (std::size_t i = 0; i < spec.images; ++i) {
    w.images.push_back(make_image(static_cast<std::int64_t>(i), fresh_set(sample_count(rng, spec))));
    TruthRecord rec;
    rec.image_id = w.images.back().image_id;
    captions.push_back(plant(w.images.back(), rec));
    w.truth.push_back(std::move(rec));
  }
  for (std::size_t i = 0; i < spec.heldout_images; ++i) {
    const auto id = static_cast<std::int64_t>(spec.images + i);
    w.heldout_images.push_back(make_image(id, fresh_set(sample_count(rng, spec))));
  }
  std::vector<std::string> distractors;
  for (std::size_t i = 0; i < spec.distractors; ++i) {
    // Distractors may repeat each other but never an image's concept set.
    std::vector<std::size_t> concepts;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw std::invalid_argument("world spec: cannot draw distractor concept sets");
      concepts = sample_concepts(rng, spec.concepts, 1 + uniform_index(rng, spec.max_concepts));
      auto key = concepts;
      std::sort(key.begin(), key.end());
      if (!used_sets.contains(key)) break;
    }
    distractors.push_back(make_caption(rng, spec, w.classes, concepts).text);
  }

  // Shuffle the training pool so text ids carry no hint of the truth.
  const std::size_t pool = captions.size() + distractors.size();
  std::vector<std::size_t> slot(pool);
  std::iota(slot.begin(), slot.end(), std::size_t{0});
  std::shuffle(slot.begin(), slot.end(), rng);
  w.texts.resize(pool);
  for (std::size_t i = 0; i < pool; ++i) {
    const std::size_t s = slot[i];
    w.texts[s].text_id = static_cast<std::int64_t>(s);
    w.texts[s].text = i < captions.size() ? captions[i] : distractors[i - captions.size()];
    if (i < captions.size()) w.truth[i].text_id = static_cast<std::int64_t>(s);
  }

  for (std::size_t i = 0; i < w.heldout_images.size(); ++i) {
    TruthRecord rec;
    rec.heldout = true;
    rec.image_id = w.heldout_images[i].image_id;
    rec.text_id = static_cast<std::int64_t>(pool + i);
    w.heldout_texts.push_back({rec.text_id, plant(w.heldout_images[i], rec)});
    w.truth.push_back(std::move(rec));
  }
  return w;
}

}  // namespace uvlp
