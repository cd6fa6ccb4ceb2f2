#pragma once

#include <cstddef>
#include <map>
#include <string>

namespace uvlp {

struct ModelConfig {
  std::size_t layers = 2;
  std::size_t hidden = 64;
  std::size_t heads = 4;
  std::size_t intermediate = 256;
  std::size_t vocab_size = 200;
  std::size_t region_dim = 16;
  std::size_t region_classes = 48;
  std::size_t max_tokens = 48;
  std::size_t max_regions = 16;
  std::size_t modalities = 2;
  double init_std = 0.02;
  double ln_eps = 1e-5;

  /// L=12, H=768, A=12 with the usual 4H feed-forward width.
  static ModelConfig full_scale();
  static ModelConfig toy();

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;

  /// Flat key → value echo used by checkpoint manifests.
  std::map<std::string, std::string> to_map() const;
};

}  // namespace uvlp
