#pragma once

#include <optional>
#include <span>

#include "uvlp/fusion/model.hpp"
#include "uvlp/numkernel/tape.hpp"

namespace uvlp {

/// Per-example (or batch-mean) loss components.
struct LossBundle {
  double mlm_rt = 0;
  double mrc = 0;
  double mrfr = 0;
  double mlm_rp = 0;
  double p_mrtc = 0;
  double mlm_is = 0;
  double itm = 0;

  /// L^R-T = MLM + MRC + MRFR.
  double region_tag() const { return mlm_rt + mrc + mrfr; }
  /// L^R-P = MLM + p-MRTC.
  double region_phrase() const { return mlm_rp + p_mrtc; }
  /// L^I-S = MLM + ITM.
  double image_sentence() const { return mlm_is + itm; }
};

/// The warmup threshold m is kept apart from any mask-index set.
struct CurriculumState {
  std::size_t epoch = 0;
  std::size_t warmup_epochs = 1;
  /// false reproduces the unweighted arm: w_ITM ≡ 1 after warmup.
  bool weighted = true;

  bool weighting_active() const { return weighted && epoch >= warmup_epochs; }
};

/// epoch < m: L^R-T + L^R-P + L^I-S. epoch ≥ m: L^R-T + w·(L^R-P + L^I-S).
/// Throws std::invalid_argument when weighting is active and w is missing.
double curriculum_total(const LossBundle& bundle, std::optional<double> w_itm,
                        const CurriculumState& state);

/// Batch form: per-example weights applied before the mean over examples.
double curriculum_total(std::span<const LossBundle> bundles, std::span<const double> w_itm,
                        const CurriculumState& state);

/// Tape form of the per-example total; w enters as a constant.
template <typename T>
nk::Var curriculum_objective(nk::Tape<T>& tape, nk::Var region_tag, nk::Var region_phrase,
                             nk::Var image_sentence, std::optional<double> w_itm,
                             const CurriculumState& state);

/// logistic(s_θ(v, t)) from a no-gradient pass over the unmasked pair.
template <typename T>
double compute_w_itm(FusionModel<T>& model, const FusedInput& pair_input);

}  // namespace uvlp
