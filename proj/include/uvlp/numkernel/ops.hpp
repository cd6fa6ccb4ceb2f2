#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uvlp/numkernel/tape.hpp"

// Differentiable ops over Tape-recorded values. Matrix ops take rank-2
// operands; reductions produce rank-0 scalars. Every op throws ShapeError on
// incompatible inputs.
namespace uvlp::nk {

template <typename T> Var matmul(Tape<T>& t, Var a, Var b);
/// a · bᵀ for a [n,k] and b [m,k].
template <typename T> Var matmul_nt(Tape<T>& t, Var a, Var b);

template <typename T> Var add(Tape<T>& t, Var a, Var b);
/// Adds a length-m vector to every row of an [n,m] matrix.
template <typename T> Var add_bias(Tape<T>& t, Var x, Var bias);
template <typename T> Var sub(Tape<T>& t, Var a, Var b);
template <typename T> Var mul(Tape<T>& t, Var a, Var b);
template <typename T> Var scale(Tape<T>& t, Var a, T factor);

/// Exact erf form.
template <typename T> Var gelu(Tape<T>& t, Var x);

/// Row-wise layer normalization with affine gamma/beta of length cols.
template <typename T> Var layer_norm(Tape<T>& t, Var x, Var gamma, Var beta, T eps);

/// Row-wise softmax. Columns with key_mask[j] == 0 get probability exactly 0
/// and do not take part in the max/normalizer. An empty mask attends to all.
template <typename T>
Var softmax_rows(Tape<T>& t, Var x, std::span<const std::uint8_t> key_mask = {});

/// Selects rows of x (indices may repeat); backward scatter-adds.
template <typename T> Var gather_rows(Tape<T>& t, Var x, std::span<const std::size_t> rows);
template <typename T> Var concat_rows(Tape<T>& t, const std::vector<Var>& parts);
template <typename T> Var concat_cols(Tape<T>& t, const std::vector<Var>& parts);
template <typename T> Var slice_cols(Tape<T>& t, Var x, std::size_t start, std::size_t len);

/// Per-row cross-entropy of logits [n,C] against class ids; returns shape [n].
template <typename T> Var cross_entropy(Tape<T>& t, Var logits, std::span<const std::size_t> targets);

/// Binary cross-entropy of logistic(score) against label y; score has one element.
template <typename T> Var bce_with_logits(Tape<T>& t, Var score, T label);

template <typename T> Var sum(Tape<T>& t, Var x);
template <typename T> Var mean(Tape<T>& t, Var x);
/// Σ_i w_i x_i with constant weights.
template <typename T> Var weighted_sum(Tape<T>& t, Var x, std::span<const T> weights);

}  // namespace uvlp::nk
