#pragma once

#include <span>
#include <vector>

#include "uvlp/numkernel/tape.hpp"
#include "uvlp/numkernel/tensor.hpp"

namespace uvlp {

// Each loss returns a rank-0 tape value. With no masked positions the result
// is the constant 0 and `logits`/`pred` are not touched (they may be unset).

/// Mean cross-entropy over masked positions. Used for every MLM variant.
template <typename T>
nk::Var mlm_loss(nk::Tape<T>& tape, nk::Var logits, std::span<const std::size_t> targets);

/// Mean cross-entropy of region class logits against c(v_m).
template <typename T>
nk::Var mrc_loss(nk::Tape<T>& tape, nk::Var logits, std::span<const std::size_t> targets);

/// Mean over masked regions of ‖h(v_m) − r(v_m)‖².
template <typename T>
nk::Var mrfr_loss(nk::Tape<T>& tape, nk::Var pred, const nk::Tensor<T>& targets);

/// For each masked region, mean cross-entropy against each token of its
/// linked phrase; then the mean over regions. Throws on an empty token list.
template <typename T>
nk::Var p_mrtc_loss(nk::Tape<T>& tape, nk::Var logits,
                    const std::vector<std::vector<std::size_t>>& targets);

/// Binary cross-entropy of logistic(score) against y ∈ {0,1}.
template <typename T>
nk::Var itm_loss(nk::Tape<T>& tape, nk::Var score, int label);

template <typename T>
nk::Var zero_loss(nk::Tape<T>& tape);

}  // namespace uvlp
