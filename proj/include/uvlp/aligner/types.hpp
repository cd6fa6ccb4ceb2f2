#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace uvlp {

/// Pixel-space box, top-left (x1,y1) to bottom-right (x2,y2).
struct Box {
  float x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  bool operator==(const Box&) const = default;
};

struct Region {
  std::vector<float> feature;
  Box box;
  std::string tag;
  std::size_t class_id = 0;
  float confidence = 1.0f;
};

/// One image's detected regions.
struct RegionSet {
  std::int64_t image_id = 0;
  float width = 0;
  float height = 0;
  std::vector<Region> regions;

  std::size_t size() const { return regions.size(); }
};

/// Half-open token range [start, end) within a sentence.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t length() const { return end - start; }
  bool operator==(const Span&) const = default;
};

struct Sentence {
  std::int64_t text_id = 0;
  std::string text;
  std::vector<std::string> words;
  std::vector<std::size_t> token_ids;
  std::vector<Span> noun_phrases;
};

struct PhraseLink {
  Span phrase;
  std::size_t region = 0;
  double score = 0;
  bool operator==(const PhraseLink&) const = default;
};

/// Retrieved (image, sentence) candidate.
struct WeakPair {
  std::int64_t image_id = 0;
  std::int64_t text_id = 0;
  std::size_t rank = 0;  // 1-based retrieval rank
  double score = 0;
  std::vector<PhraseLink> links;
  int label = 1;
  bool operator==(const WeakPair&) const = default;
};

enum class MaskModality : std::uint8_t { None, Text, Vision };

enum class TextAction : std::uint8_t { Mask, Random, Keep };

struct TextMask {
  std::size_t position = 0;  // index into the text tokens (no specials)
  std::size_t target = 0;    // original token id
  TextAction action = TextAction::Mask;
  std::size_t replacement = 0;  // token id written into the input
};

struct RegionMask {
  std::size_t region = 0;
  std::size_t target_class = 0;        // c(v_m)
  std::vector<float> target_feature;   // r(v_m)
  std::vector<std::size_t> target_tokens;  // p-MRTC targets, R-N plans only
};

/// Mask actions and recovery targets for one training view.
struct MaskPlan {
  MaskModality modality = MaskModality::None;
  std::vector<TextMask> text;
  std::vector<RegionMask> regions;
  /// R-N plans: links chosen by the proportional draw, before the forced minimum.
  std::vector<std::size_t> drawn_links;
  bool forced = false;

  bool empty() const { return text.empty() && regions.empty(); }
};

}  // namespace uvlp
