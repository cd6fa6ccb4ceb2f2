#pragma once

#include <span>
#include <vector>

#include "uvlp/aligner/types.hpp"
#include "uvlp/numkernel/random.hpp"

namespace uvlp {

/// BERT-style corruption: each token masked with probability `rate`; a masked
/// token becomes [MASK] 80%, a random non-special token 10%, unchanged 10%.
std::vector<TextMask> plan_text_masks(std::span<const std::size_t> tokens, double rate,
                                      std::size_t vocab_size, Rng& rng);

/// Region-tag plan: text masks over the tag tokens plus independent region
/// masks (feature zeroed) with class and feature targets.
MaskPlan plan_rt_masks(std::span<const std::size_t> tag_tokens, const RegionSet& regions,
                       double rate, std::size_t vocab_size, Rng& rng);

/// p_i = min(1, rho · s_i / mean(s)) for each link.
std::vector<double> link_mask_probabilities(std::span<const PhraseLink> links, double rho);

/// Region–noun-phrase plan. A fair coin picks the modality; links are drawn
/// with link_mask_probabilities and, if none is drawn, the best-scoring link
/// is forced. Only one modality is ever masked.
MaskPlan plan_rn_masks(const WeakPair& pair, const Sentence& sentence, const RegionSet& regions,
                       double rho, Rng& rng);

/// Plan for the sentence view: text masks only.
MaskPlan plan_is_masks(std::span<const std::size_t> tokens, double rate, std::size_t vocab_size,
                       Rng& rng);

struct ItmSample {
  std::size_t source = 0;  // index into the batch
  std::int64_t image_id = 0;
  std::int64_t text_id = 0;
  int label = 1;
};

/// Keeps each pair as a positive with probability `positive_prob`; otherwise
/// pairs its image with the sentence of another batch entry that has a
/// different image and a different sentence (label 0). Entries without any
/// valid partner stay positive.
std::vector<ItmSample> sample_itm_pairs(std::span<const WeakPair> batch, Rng& rng,
                                        double positive_prob = 0.5);

/// Writes the plan's text replacements into a copy of `tokens`.
std::vector<std::size_t> apply_text_masks(std::span<const std::size_t> tokens,
                                          const std::vector<TextMask>& masks);

}  // namespace uvlp
