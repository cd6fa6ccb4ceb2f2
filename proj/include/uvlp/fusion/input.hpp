#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "uvlp/aligner/types.hpp"

namespace uvlp {

using BoxGeometry = std::array<float, 5>;

/// [x1/W, y1/H, x2/W, y2/H, area/(W·H)]. Throws std::invalid_argument for a
/// box outside the image or with zero area.
BoxGeometry encode_box_geometry(const Box& box, float width, float height);

/// Single-stream model input: [CLS] text [SEP] (padding) followed by regions
/// (padding). Text positions are 0-based within the text segment; regions
/// carry no sequence position.
struct FusedInput {
  std::vector<std::size_t> token_ids;
  std::vector<float> region_features;  // region_count × region_dim, row-major
  std::vector<BoxGeometry> geometry;
  std::vector<std::uint8_t> attend;    // text_len + region_count; 0 = padding
  std::size_t region_dim = 0;

  std::size_t text_len() const { return token_ids.size(); }
  std::size_t region_count() const { return geometry.size(); }
  std::size_t length() const { return text_len() + region_count(); }
  /// Sequence position of text token `i` (0-based, excluding [CLS]).
  static std::size_t text_row(std::size_t i) { return i + 1; }
  std::size_t region_row(std::size_t r) const { return text_len() + r; }
};

struct FusedInputOptions {
  std::size_t pad_text_to = 0;     // total text segment length incl. specials
  std::size_t pad_regions_to = 0;
};

/// Builds the fused input. `text_tokens` exclude specials and already carry
/// any mask replacements; regions listed in `zeroed_regions` have their
/// features replaced by zeros.
FusedInput make_fused_input(std::span<const std::size_t> text_tokens, const RegionSet& regions,
                            std::span<const std::size_t> zeroed_regions = {},
                            FusedInputOptions options = {});

}  // namespace uvlp
