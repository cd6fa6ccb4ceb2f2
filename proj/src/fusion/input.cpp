#include "uvlp/fusion/input.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "uvlp/aligner/vocabulary.hpp"

namespace uvlp {

BoxGeometry encode_box_geometry(const Box& b, float width, float height) {
  if (!(width > 0 && height > 0)) throw std::invalid_argument("box geometry: non-positive image size");
  if (!(b.x1 >= 0 && b.y1 >= 0 && b.x2 <= width && b.y2 <= height)) {
    throw std::invalid_argument("box geometry: box outside the image");
  }
  if (!(b.x2 > b.x1 && b.y2 > b.y1)) throw std::invalid_argument("box geometry: zero-area box");
  const double w = width, h = height;
  const double area = (static_cast<double>(b.y2) - b.y1) * (static_cast<double>(b.x2) - b.x1);
  return {static_cast<float>(b.x1 / w), static_cast<float>(b.y1 / h), static_cast<float>(b.x2 / w),
          static_cast<float>(b.y2 / h), static_cast<float>(area / (w * h))};
}

FusedInput make_fused_input(std::span<const std::size_t> text_tokens, const RegionSet& regions,
                            std::span<const std::size_t> zeroed_regions, FusedInputOptions options) {
  FusedInput in;
  in.token_ids.reserve(text_tokens.size() + 2);
  in.token_ids.push_back(Vocabulary::kCls);
  in.token_ids.insert(in.token_ids.end(), text_tokens.begin(), text_tokens.end());
  in.token_ids.push_back(Vocabulary::kSep);
  in.attend.assign(in.token_ids.size(), 1);
  while (in.token_ids.size() < options.pad_text_to) {
    in.token_ids.push_back(Vocabulary::kPad);
    in.attend.push_back(0);
  }

  in.region_dim = regions.regions.empty() ? 0 : regions.regions.front().feature.size();
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const Region& reg = regions.regions[r];
    if (reg.feature.size() != in.region_dim) {
      throw std::invalid_argument("fused input: region " + std::to_string(r) + " has feature dim " +
                                  std::to_string(reg.feature.size()) + ", expected " +
                                  std::to_string(in.region_dim));
    }
    const bool zeroed =
        std::find(zeroed_regions.begin(), zeroed_regions.end(), r) != zeroed_regions.end();
    if (zeroed) {
      in.region_features.insert(in.region_features.end(), in.region_dim, 0.0f);
    } else {
      in.region_features.insert(in.region_features.end(), reg.feature.begin(), reg.feature.end());
    }
    in.geometry.push_back(encode_box_geometry(reg.box, regions.width, regions.height));
    in.attend.push_back(1);
  }
  while (in.geometry.size() < options.pad_regions_to) {
    in.region_features.insert(in.region_features.end(), in.region_dim, 0.0f);
    in.geometry.push_back({0, 0, 0, 0, 0});
    in.attend.push_back(0);
  }
  return in;
}

}  // namespace uvlp
