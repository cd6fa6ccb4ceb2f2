#include "uvlp/objectives/losses.hpp"

#include <stdexcept>
#include <string>

#include "uvlp/numkernel/ops.hpp"

namespace uvlp {

template <typename T>
nk::Var zero_loss(nk::Tape<T>& tape) {
  return tape.constant(nk::Tensor<T>(nk::Shape{}));
}

template <typename T>
nk::Var mlm_loss(nk::Tape<T>& tape, nk::Var logits, std::span<const std::size_t> targets) {
  if (targets.empty()) return zero_loss(tape);
  return nk::mean(tape, nk::cross_entropy(tape, logits, targets));
}

template <typename T>
nk::Var mrc_loss(nk::Tape<T>& tape, nk::Var logits, std::span<const std::size_t> targets) {
  return mlm_loss(tape, logits, targets);
}

template <typename T>
nk::Var mrfr_loss(nk::Tape<T>& tape, nk::Var pred, const nk::Tensor<T>& targets) {
  if (targets.values.empty()) return zero_loss(tape);
  if (tape.shape(pred) != targets.shape) {
    throw nk::ShapeError("mrfr_loss: prediction " + nk::shape_str(tape.shape(pred)) +
                         " vs target " + nk::shape_str(targets.shape));
  }
  nk::Var diff = nk::sub(tape, pred, tape.constant(targets));
  nk::Var sq = nk::mul(tape, diff, diff);
  return nk::scale(tape, nk::sum(tape, sq), T(1) / static_cast<T>(targets.rows()));
}

template <typename T>
nk::Var p_mrtc_loss(nk::Tape<T>& tape, nk::Var logits,
                    const std::vector<std::vector<std::size_t>>& targets) {
  if (targets.empty()) return zero_loss(tape);
  std::vector<std::size_t> rows;
  std::vector<std::size_t> flat;
  std::vector<T> weights;
  const T per_region = T(1) / static_cast<T>(targets.size());
  for (std::size_t r = 0; r < targets.size(); ++r) {
    if (targets[r].empty()) {
      throw std::invalid_argument("p_mrtc_loss: masked region " + std::to_string(r) +
                                  " has no target tokens");
    }
    for (std::size_t tok : targets[r]) {
      rows.push_back(r);
      flat.push_back(tok);
      weights.push_back(per_region / static_cast<T>(targets[r].size()));
    }
  }
  nk::Var expanded = nk::gather_rows(tape, logits, rows);
  return nk::weighted_sum(tape, nk::cross_entropy(tape, expanded, flat), std::span<const T>(weights));
}

template <typename T>
nk::Var itm_loss(nk::Tape<T>& tape, nk::Var score, int label) {
  if (label != 0 && label != 1) throw std::invalid_argument("itm_loss: label must be 0 or 1");
  return nk::bce_with_logits(tape, score, static_cast<T>(label));
}

#define UVLP_INSTANTIATE_LOSSES(T)                                                                  \
  template nk::Var zero_loss<T>(nk::Tape<T>&);                                                      \
  template nk::Var mlm_loss<T>(nk::Tape<T>&, nk::Var, std::span<const std::size_t>);                \
  template nk::Var mrc_loss<T>(nk::Tape<T>&, nk::Var, std::span<const std::size_t>);                \
  template nk::Var mrfr_loss<T>(nk::Tape<T>&, nk::Var, const nk::Tensor<T>&);                       \
  template nk::Var p_mrtc_loss<T>(nk::Tape<T>&, nk::Var, const std::vector<std::vector<std::size_t>>&); \
  template nk::Var itm_loss<T>(nk::Tape<T>&, nk::Var, int);

UVLP_INSTANTIATE_LOSSES(float)
UVLP_INSTANTIATE_LOSSES(double)

#undef UVLP_INSTANTIATE_LOSSES

}  // namespace uvlp
