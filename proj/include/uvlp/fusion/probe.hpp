#pragma once

#include <vector>

#include "uvlp/aligner/types.hpp"
#include "uvlp/fusion/model.hpp"
#include "uvlp/numkernel/tensor.hpp"

namespace uvlp {

struct AttentionProbe {
  std::size_t text_len = 0;
  std::size_t region_count = 0;
  /// full[layer][head]: [length, length] attention probabilities.
  std::vector<std::vector<nk::Tensor<double>>> full;
  /// text_to_region[layer][head]: rows = text positions, cols = regions.
  std::vector<std::vector<nk::Tensor<double>>> text_to_region;
  /// Head-averaged text→region attention of the last layer.
  nk::Tensor<double> last_layer_mean;
};

/// Runs one no-grad forward pass and collects attention maps.
template <typename T>
AttentionProbe attention_probe(FusionModel<T>& model, const FusedInput& input);

/// No-grad ITM logit for a fused input.
template <typename T>
double itm_logit(FusionModel<T>& model, const FusedInput& input);

/// logistic(s).
double logistic(double s);

struct PlantedPhrase {
  Span phrase;         // token span within the sentence (no specials)
  std::size_t region;  // planted region index
};

struct ProbeExample {
  RegionSet image;
  std::vector<std::size_t> matched_tokens;   // true caption
  std::vector<std::size_t> shuffled_tokens;  // caption of another image
  std::vector<PlantedPhrase> phrases;        // truth for the matched caption
};

struct ProbeResult {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

/// Matched pairs count as correct when s > 0, shuffled pairs when s <= 0.
template <typename T>
ProbeResult itm_probe(FusionModel<T>& model, const std::vector<ProbeExample>& examples);

/// For each planted phrase: mean last-layer head-averaged attention of its
/// tokens over regions; correct when the argmax is the planted region.
template <typename T>
ProbeResult grounding_probe(FusionModel<T>& model, const std::vector<ProbeExample>& examples);

}  // namespace uvlp
