#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uvlp/aligner/types.hpp"
#include "uvlp/fusion/probe.hpp"

namespace uvlp {

/// Parameters of a synthetic planted world. Concepts are the first
/// `concepts` built-in lexicon nouns; their names double as region tags.
struct WorldSpec {
  std::size_t concepts = 40;
  std::size_t region_dim = 16;
  double noise_sigma = 0.5;
  std::size_t min_concepts = 6;  // per image, inclusive
  std::size_t max_concepts = 6;
  std::size_t images = 500;
  std::size_t distractors = 1000;
  std::size_t heldout_images = 200;
  double adjective_prob = 0.3;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

struct RawText {
  std::int64_t text_id = 0;
  std::string text;
};

/// Ground truth for one image: its planted caption and which caption phrase
/// describes which region.
struct TruthRecord {
  bool heldout = false;
  std::int64_t image_id = 0;
  std::int64_t text_id = 0;
  std::vector<PlantedPhrase> phrases;
};

struct World {
  std::vector<std::string> classes;
  std::vector<std::vector<float>> prototypes;  // one per concept
  std::vector<RegionSet> images;
  std::vector<RawText> texts;  // planted captions and distractors, shuffled
  std::vector<RegionSet> heldout_images;
  std::vector<RawText> heldout_texts;
  std::vector<TruthRecord> truth;  // training records first, then held-out
};

/// Deterministic in the spec. No two images (training or held-out) share a
/// concept set, and no distractor repeats an image's concept set.
World generate_world(const WorldSpec& spec);

}  // namespace uvlp
