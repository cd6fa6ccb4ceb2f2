#include "uvlp/objectives/curriculum.hpp"

#include <stdexcept>
#include <string>

#include "uvlp/fusion/probe.hpp"
#include "uvlp/numkernel/ops.hpp"

namespace uvlp {
namespace {

double resolve_weight(std::optional<double> w_itm, const CurriculumState& state) {
  if (!state.weighting_active()) return 1.0;
  if (!w_itm) {
    throw std::invalid_argument("curriculum: epoch " + std::to_string(state.epoch) +
                                " >= warmup " + std::to_string(state.warmup_epochs) +
                                " requires w_ITM");
  }
  return *w_itm;
}

}  // namespace

double curriculum_total(const LossBundle& b, std::optional<double> w_itm, const CurriculumState& state) {
  if (!state.weighting_active()) return b.region_tag() + b.region_phrase() + b.image_sentence();
  return b.region_tag() + resolve_weight(w_itm, state) * (b.region_phrase() + b.image_sentence());
}

double curriculum_total(std::span<const LossBundle> bundles, std::span<const double> w_itm,
                        const CurriculumState& state) {
  if (bundles.empty()) return 0.0;
  if (state.weighting_active() && w_itm.size() != bundles.size()) {
    throw std::invalid_argument("curriculum: " + std::to_string(w_itm.size()) + " weights for " +
                                std::to_string(bundles.size()) + " examples");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    std::optional<double> w;
    if (i < w_itm.size()) w = w_itm[i];
    acc += curriculum_total(bundles[i], w, state);
  }
  return acc / static_cast<double>(bundles.size());
}

template <typename T>
nk::Var curriculum_objective(nk::Tape<T>& tape, nk::Var region_tag, nk::Var region_phrase,
                             nk::Var image_sentence, std::optional<double> w_itm,
                             const CurriculumState& state) {
  nk::Var rest = nk::add(tape, region_phrase, image_sentence);
  if (state.weighting_active()) rest = nk::scale(tape, rest, static_cast<T>(resolve_weight(w_itm, state)));
  return nk::add(tape, region_tag, rest);
}

template <typename T>
double compute_w_itm(FusionModel<T>& model, const FusedInput& pair_input) {
  return logistic(itm_logit(model, pair_input));
}

template nk::Var curriculum_objective<float>(nk::Tape<float>&, nk::Var, nk::Var, nk::Var,
                                             std::optional<double>, const CurriculumState&);
template nk::Var curriculum_objective<double>(nk::Tape<double>&, nk::Var, nk::Var, nk::Var,
                                              std::optional<double>, const CurriculumState&);
template double compute_w_itm<float>(FusionModel<float>&, const FusedInput&);
template double compute_w_itm<double>(FusionModel<double>&, const FusedInput&);

}  // namespace uvlp
