#include "uvlp/numkernel/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace uvlp::nk {
namespace {

struct Dims {
  std::size_t rows;
  std::size_t cols;
};

Dims matrix_dims(const Shape& s, std::string_view op) {
  if (s.size() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got shape " + shape_str(s));
  }
  return {s[0], s[1]};
}

[[noreturn]] void mismatch(std::string_view op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                   shape_str(b));
}

}  // namespace

template <typename T>
Var matmul(Tape<T>& t, Var a, Var b) {
  auto [n, k] = matrix_dims(t.shape(a), "matmul");
  auto [k2, m] = matrix_dims(t.shape(b), "matmul");
  if (k != k2) mismatch("matmul", t.shape(a), t.shape(b));
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  std::vector<T> out(n * m, T{0});
  for (std::size_t i = 0; i < n; ++i) {
    T* orow = out.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = av[i * k + p];
      const T* brow = bv.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
    }
  }
  return t.record(OpKind::MatMul, {n, m}, std::move(out), {a, b},
                  [a, b, n, k, m](Tape<T>& tp, std::uint32_t self) {
                    const T f = tp.fault_factor(OpKind::MatMul);
                    const auto& g = tp.grad(Var{self});
                    if (tp.needs_grad(a)) {
                      const auto& bv = tp.value(b);
                      auto& ga = tp.grad(a);
                      for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t p = 0; p < k; ++p) {
                          T acc{0};
                          for (std::size_t j = 0; j < m; ++j) acc += g[i * m + j] * bv[p * m + j];
                          ga[i * k + p] += f * acc;
                        }
                    }
                    if (tp.needs_grad(b)) {
                      const auto& av = tp.value(a);
                      auto& gb = tp.grad(b);
                      for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t p = 0; p < k; ++p) {
                          const T aip = f * av[i * k + p];
                          for (std::size_t j = 0; j < m; ++j) gb[p * m + j] += aip * g[i * m + j];
                        }
                    }
                  });
}

template <typename T>
Var matmul_nt(Tape<T>& t, Var a, Var b) {
  auto [n, k] = matrix_dims(t.shape(a), "matmul_nt");
  auto [m, k2] = matrix_dims(t.shape(b), "matmul_nt");
  if (k != k2) mismatch("matmul_nt", t.shape(a), t.shape(b));
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  std::vector<T> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      T acc{0};
      for (std::size_t p = 0; p < k; ++p) acc += av[i * k + p] * bv[j * k + p];
      out[i * m + j] = acc;
    }
  return t.record(OpKind::MatMulNT, {n, m}, std::move(out), {a, b},
                  [a, b, n, k, m](Tape<T>& tp, std::uint32_t self) {
                    const T f = tp.fault_factor(OpKind::MatMulNT);
                    const auto& g = tp.grad(Var{self});
                    if (tp.needs_grad(a)) {
                      const auto& bv = tp.value(b);
                      auto& ga = tp.grad(a);
                      for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < m; ++j) {
                          const T gij = f * g[i * m + j];
                          for (std::size_t p = 0; p < k; ++p) ga[i * k + p] += gij * bv[j * k + p];
                        }
                    }
                    if (tp.needs_grad(b)) {
                      const auto& av = tp.value(a);
                      auto& gb = tp.grad(b);
                      for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < m; ++j) {
                          const T gij = f * g[i * m + j];
                          for (std::size_t p = 0; p < k; ++p) gb[j * k + p] += gij * av[i * k + p];
                        }
                    }
                  });
}

namespace {

template <typename T, typename Fwd>
Var elementwise(Tape<T>& t, Var a, Var b, OpKind kind, Fwd fwd) {
  if (t.shape(a) != t.shape(b)) mismatch(op_name(kind), t.shape(a), t.shape(b));
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i], bv[i]);
  return t.record(kind, t.shape(a), std::move(out), {a, b},
                  [a, b, kind](Tape<T>& tp, std::uint32_t self) {
                    const T f = tp.fault_factor(kind);
                    const auto& g = tp.grad(Var{self});
                    if (tp.needs_grad(a)) {
                      auto& ga = tp.grad(a);
                      if (kind == OpKind::Mul) {
                        const auto& bv = tp.value(b);
                        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += f * g[i] * bv[i];
                      } else {
                        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += f * g[i];
                      }
                    }
                    if (tp.needs_grad(b)) {
                      auto& gb = tp.grad(b);
                      if (kind == OpKind::Mul) {
                        const auto& av = tp.value(a);
                        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += f * g[i] * av[i];
                      } else if (kind == OpKind::Sub) {
                        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= f * g[i];
                      } else {
                        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += f * g[i];
                      }
                    }
                  });
}

}  // namespace

template <typename T>
Var add(Tape<T>& t, Var a, Var b) {
  return elementwise(t, a, b, OpKind::Add, [](T x, T y) { return x + y; });
}

template <typename T>
Var sub(Tape<T>& t, Var a, Var b) {
  return elementwise(t, a, b, OpKind::Sub, [](T x, T y) { return x - y; });
}

template <typename T>
Var mul(Tape<T>& t, Var a, Var b) {
  return elementwise(t, a, b, OpKind::Mul, [](T x, T y) { return x * y; });
}

template <typename T>
Var add_bias(Tape<T>& t, Var x, Var bias) {
  auto [n, m] = matrix_dims(t.shape(x), "add_bias");
  if (numel(t.shape(bias)) != m) mismatch("add_bias", t.shape(x), t.shape(bias));
  std::vector<T> out = t.value(x);
  const auto& bv = t.value(bias);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += bv[j];
  return t.record(OpKind::AddBias, {n, m}, std::move(out), {x, bias},
                  [x, bias, n, m](Tape<T>& tp, std::uint32_t self) {
                    const T f = tp.fault_factor(OpKind::AddBias);
                    const auto& g = tp.grad(Var{self});
                    if (tp.needs_grad(x)) {
                      auto& gx = tp.grad(x);
                      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += f * g[i];
                    }
                    if (tp.needs_grad(bias)) {
                      auto& gb = tp.grad(bias);
                      for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < m; ++j) gb[j] += f * g[i * m + j];
                    }
                  });
}

template <typename T>
Var scale(Tape<T>& t, Var a, T factor) {
  std::vector<T> out = t.value(a);
  for (auto& v : out) v *= factor;
  return t.record(OpKind::Scale, t.shape(a), std::move(out), {a},
                  [a, factor](Tape<T>& tp, std::uint32_t self) {
                    const T f = tp.fault_factor(OpKind::Scale) * factor;
                    const auto& g = tp.grad(Var{self});
                    auto& ga = tp.grad(a);
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += f * g[i];
                  });
}

template <typename T>
Var gelu(Tape<T>& t, Var x) {
  const auto& xv = t.value(x);
  std::vector<T> out(xv.size());
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = T(0.5) * xv[i] * (T(1) + std::erf(xv[i] * inv_sqrt2));
  return t.record(OpKind::Gelu, t.shape(x), std::move(out), {x},
                  [x, inv_sqrt2](Tape<T>& tp, std::uint32_t self) {
                    const T f = tp.fault_factor(OpKind::Gelu);
                    const T inv_sqrt_2pi = inv_sqrt2 * std::numbers::inv_sqrtpi_v<T>;
                    const auto& g = tp.grad(Var{self});
                    const auto& xv = tp.value(x);
                    auto& gx = tp.grad(x);
                    for (std::size_t i = 0; i < g.size(); ++i) {
                      const T v = xv[i];
                      const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
                      const T pdf = inv_sqrt_2pi * std::exp(T(-0.5) * v * v);
                      gx[i] += f * g[i] * (cdf + v * pdf);
                    }
                  });
}

template <typename T>
Var layer_norm(Tape<T>& t, Var x, Var gamma, Var beta, T eps) {
  auto [n, m] = matrix_dims(t.shape(x), "layer_norm");
  if (numel(t.shape(gamma)) != m) mismatch("layer_norm", t.shape(x), t.shape(gamma));
  if (numel(t.shape(beta)) != m) mismatch("layer_norm", t.shape(x), t.shape(beta));
  const auto& xv = t.value(x);
  const auto& gv = t.value(gamma);
  const auto& bv = t.value(beta);
  std::vector<T> xhat(n * m);
  std::vector<T> rstd(n);
  std::vector<T> out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = xv.data() + i * m;
    T mu{0};
    for (std::size_t j = 0; j < m; ++j) mu += row[j];
    mu /= static_cast<T>(m);
    T var{0};
    for (std::size_t j = 0; j < m; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<T>(m);
    rstd[i] = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < m; ++j) {
      xhat[i * m + j] = (row[j] - mu) * rstd[i];
      out[i * m + j] = xhat[i * m + j] * gv[j] + bv[j];
    }
  }
  return t.record(
      OpKind::LayerNorm, {n, m}, std::move(out), {x, gamma, beta},
      [x, gamma, beta, n, m, xhat = std::move(xhat), rstd = std::move(rstd)](Tape<T>& tp,
                                                                              std::uint32_t self) {
        const T f = tp.fault_factor(OpKind::LayerNorm);
        const auto& g = tp.grad(Var{self});
        if (tp.needs_grad(gamma)) {
          auto& gg = tp.grad(gamma);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) gg[j] += f * g[i * m + j] * xhat[i * m + j];
        }
        if (tp.needs_grad(beta)) {
          auto& gb = tp.grad(beta);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) gb[j] += f * g[i * m + j];
        }
        if (tp.needs_grad(x)) {
          const auto& gv = tp.value(gamma);
          auto& gx = tp.grad(x);
          std::vector<T> dxhat(m);
          for (std::size_t i = 0; i < n; ++i) {
            T mean_d{0};
            T mean_dx{0};
            for (std::size_t j = 0; j < m; ++j) {
              dxhat[j] = g[i * m + j] * gv[j];
              mean_d += dxhat[j];
              mean_dx += dxhat[j] * xhat[i * m + j];
            }
            mean_d /= static_cast<T>(m);
            mean_dx /= static_cast<T>(m);
            for (std::size_t j = 0; j < m; ++j)
              gx[i * m + j] += f * rstd[i] * (dxhat[j] - mean_d - xhat[i * m + j] * mean_dx);
          }
        }
      });
}

template <typename T>
Var softmax_rows(Tape<T>& t, Var x, std::span<const std::uint8_t> key_mask) {
  auto [n, m] = matrix_dims(t.shape(x), "softmax");
  if (!key_mask.empty() && key_mask.size() != m) {
    throw ShapeError("softmax: key mask of length " + std::to_string(key_mask.size()) +
                     " for shape " + shape_str(t.shape(x)));
  }
  auto attended = [&](std::size_t j) { return key_mask.empty() || key_mask[j] != 0; };
  const auto& xv = t.value(x);
  std::vector<T> out(n * m, T{0});
  for (std::size_t i = 0; i < n; ++i) {
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < m; ++j)
      if (attended(j)) mx = std::max(mx, xv[i * m + j]);
    T z{0};
    for (std::size_t j = 0; j < m; ++j) {
      if (!attended(j)) continue;
      out[i * m + j] = std::exp(xv[i * m + j] - mx);
      z += out[i * m + j];
    }
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] /= z;
  }
  return t.record(OpKind::Softmax, {n, m}, std::move(out), {x},
                  [x, n, m](Tape<T>& tp, std::uint32_t self) {
                    const T f = tp.fault_factor(OpKind::Softmax);
                    const auto& g = tp.grad(Var{self});
                    const auto& p = tp.value(Var{self});
                    auto& gx = tp.grad(x);
                    for (std::size_t i = 0; i < n; ++i) {
                      T dot{0};
                      for (std::size_t j = 0; j < m; ++j) dot += p[i * m + j] * g[i * m + j];
                      for (std::size_t j = 0; j < m; ++j)
                        gx[i * m + j] += f * p[i * m + j] * (g[i * m + j] - dot);
                    }
                  });
}

template <typename T>
Var gather_rows(Tape<T>& t, Var x, std::span<const std::size_t> rows) {
  auto [n, m] = matrix_dims(t.shape(x), "gather_rows");
  const auto& xv = t.value(x);
  std::vector<T> out(rows.size() * m);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= n) {
      throw ShapeError("gather_rows: row " + std::to_string(rows[r]) + " out of range for shape " +
                       shape_str(t.shape(x)));
    }
    std::copy_n(xv.data() + rows[r] * m, m, out.data() + r * m);
  }
  return t.record(OpKind::GatherRows, {rows.size(), m}, std::move(out), {x},
                  [x, m, rows = std::vector<std::size_t>(rows.begin(), rows.end())](
                      Tape<T>& tp, std::uint32_t self) {
                    const T f = tp.fault_factor(OpKind::GatherRows);
                    const auto& g = tp.grad(Var{self});
                    auto& gx = tp.grad(x);
                    for (std::size_t r = 0; r < rows.size(); ++r)
                      for (std::size_t j = 0; j < m; ++j) gx[rows[r] * m + j] += f * g[r * m + j];
                  });
}

template <typename T>
Var concat_rows(Tape<T>& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t m = matrix_dims(t.shape(parts[0]), "concat_rows").cols;
  std::vector<T> out;
  std::vector<std::size_t> offsets;
  for (Var p : parts) {
    auto d = matrix_dims(t.shape(p), "concat_rows");
    if (d.cols != m) mismatch("concat_rows", t.shape(parts[0]), t.shape(p));
    offsets.push_back(out.size());
    const auto& v = t.value(p);
    out.insert(out.end(), v.begin(), v.end());
  }
  const std::size_t n = out.size() / m;
  return t.record(OpKind::ConcatRows, {n, m}, std::move(out), parts,
                  [parts, offsets](Tape<T>& tp, std::uint32_t self) {
                    const T f = tp.fault_factor(OpKind::ConcatRows);
                    const auto& g = tp.grad(Var{self});
                    for (std::size_t k = 0; k < parts.size(); ++k) {
                      if (!tp.needs_grad(parts[k])) continue;
                      auto& gp = tp.grad(parts[k]);
                      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += f * g[offsets[k] + i];
                    }
                  });
}

template <typename T>
Var concat_cols(Tape<T>& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t n = matrix_dims(t.shape(parts[0]), "concat_cols").rows;
  std::vector<std::size_t> widths;
  std::size_t m = 0;
  for (Var p : parts) {
    auto d = matrix_dims(t.shape(p), "concat_cols");
    if (d.rows != n) mismatch("concat_cols", t.shape(parts[0]), t.shape(p));
    widths.push_back(d.cols);
    m += d.cols;
  }
  std::vector<T> out(n * m);
  std::size_t c0 = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& v = t.value(parts[k]);
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(v.data() + i * widths[k], widths[k], out.data() + i * m + c0);
    c0 += widths[k];
  }
  return t.record(OpKind::ConcatCols, {n, m}, std::move(out), parts,
                  [parts, widths, n, m](Tape<T>& tp, std::uint32_t self) {
                    const T f = tp.fault_factor(OpKind::ConcatCols);
                    const auto& g = tp.grad(Var{self});
                    std::size_t c0 = 0;
                    for (std::size_t k = 0; k < parts.size(); ++k) {
                      if (tp.needs_grad(parts[k])) {
                        auto& gp = tp.grad(parts[k]);
                        for (std::size_t i = 0; i < n; ++i)
                          for (std::size_t j = 0; j < widths[k]; ++j)
                            gp[i * widths[k] + j] += f * g[i * m + c0 + j];
                      }
                      c0 += widths[k];
                    }
                  });
}

template <typename T>
Var slice_cols(Tape<T>& t, Var x, std::size_t start, std::size_t len) {
  auto [n, m] = matrix_dims(t.shape(x), "slice_cols");
  if (start + len > m || len == 0) {
    throw ShapeError("slice_cols: columns [" + std::to_string(start) + "," +
                     std::to_string(start + len) + ") out of range for shape " + shape_str(t.shape(x)));
  }
  const auto& xv = t.value(x);
  std::vector<T> out(n * len);
  for (std::size_t i = 0; i < n; ++i) std::copy_n(xv.data() + i * m + start, len, out.data() + i * len);
  return t.record(OpKind::SliceCols, {n, len}, std::move(out), {x},
                  [x, n, m, start, len](Tape<T>& tp, std::uint32_t self) {
                    const T f = tp.fault_factor(OpKind::SliceCols);
                    const auto& g = tp.grad(Var{self});
                    auto& gx = tp.grad(x);
                    for (std::size_t i = 0; i < n; ++i)
                      for (std::size_t j = 0; j < len; ++j) gx[i * m + start + j] += f * g[i * len + j];
                  });
}

template <typename T>
Var cross_entropy(Tape<T>& t, Var logits, std::span<const std::size_t> targets) {
  auto [n, c] = matrix_dims(t.shape(logits), "cross_entropy");
  if (targets.size() != n) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                     shape_str(t.shape(logits)));
  }
  const auto& lv = t.value(logits);
  std::vector<T> probs(n * c);
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] >= c) {
      throw std::out_of_range("cross_entropy: target " + std::to_string(targets[i]) +
                              " >= class count " + std::to_string(c));
    }
    const T* row = lv.data() + i * c;
    const T mx = *std::max_element(row, row + c);
    T z{0};
    for (std::size_t j = 0; j < c; ++j) {
      probs[i * c + j] = std::exp(row[j] - mx);
      z += probs[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] /= z;
    out[i] = std::log(z) + mx - row[targets[i]];
  }
  return t.record(OpKind::CrossEntropy, {n}, std::move(out), {logits},
                  [logits, n, c, probs = std::move(probs),
                   targets = std::vector<std::size_t>(targets.begin(), targets.end())](
                      Tape<T>& tp, std::uint32_t self) {
                    const T f = tp.fault_factor(OpKind::CrossEntropy);
                    const auto& g = tp.grad(Var{self});
                    auto& gl = tp.grad(logits);
                    for (std::size_t i = 0; i < n; ++i) {
                      for (std::size_t j = 0; j < c; ++j) {
                        const T onehot = j == targets[i] ? T(1) : T(0);
                        gl[i * c + j] += f * g[i] * (probs[i * c + j] - onehot);
                      }
                    }
                  });
}

template <typename T>
Var bce_with_logits(Tape<T>& t, Var score, T label) {
  if (numel(t.shape(score)) != 1) {
    throw ShapeError("bce_with_logits: score must have one element, got " + shape_str(t.shape(score)));
  }
  const T s = t.value(score)[0];
  const T loss = std::max(s, T(0)) - s * label + std::log1p(std::exp(-std::abs(s)));
  return t.record(OpKind::BceWithLogits, {}, {loss}, {score},
                  [score, label, s](Tape<T>& tp, std::uint32_t self) {
                    const T f = tp.fault_factor(OpKind::BceWithLogits);
                    const T sig = T(1) / (T(1) + std::exp(-s));
                    tp.grad(score)[0] += f * tp.grad(Var{self})[0] * (sig - label);
                  });
}

template <typename T>
Var sum(Tape<T>& t, Var x) {
  const auto& xv = t.value(x);
  T acc{0};
  for (T v : xv) acc += v;
  return t.record(OpKind::Sum, {}, {acc}, {x}, [x](Tape<T>& tp, std::uint32_t self) {
    const T g = tp.fault_factor(OpKind::Sum) * tp.grad(Var{self})[0];
    for (auto& v : tp.grad(x)) v += g;
  });
}

template <typename T>
Var mean(Tape<T>& t, Var x) {
  const auto n = numel(t.shape(x));
  return scale(t, sum(t, x), T(1) / static_cast<T>(n));
}

template <typename T>
Var weighted_sum(Tape<T>& t, Var x, std::span<const T> weights) {
  const auto& xv = t.value(x);
  if (weights.size() != xv.size()) {
    throw ShapeError("weighted_sum: " + std::to_string(weights.size()) + " weights for shape " +
                     shape_str(t.shape(x)));
  }
  T acc{0};
  for (std::size_t i = 0; i < xv.size(); ++i) acc += weights[i] * xv[i];
  return t.record(OpKind::WeightedSum, {}, {acc}, {x},
                  [x, w = std::vector<T>(weights.begin(), weights.end())](Tape<T>& tp,
                                                                          std::uint32_t self) {
                    const T g = tp.fault_factor(OpKind::WeightedSum) * tp.grad(Var{self})[0];
                    auto& gx = tp.grad(x);
                    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g * w[i];
                  });
}

#define UVLP_INSTANTIATE_OPS(T)                                                          \
  template Var matmul<T>(Tape<T>&, Var, Var);                                            \
  template Var matmul_nt<T>(Tape<T>&, Var, Var);                                         \
  template Var add<T>(Tape<T>&, Var, Var);                                               \
  template Var add_bias<T>(Tape<T>&, Var, Var);                                          \
  template Var sub<T>(Tape<T>&, Var, Var);                                               \
  template Var mul<T>(Tape<T>&, Var, Var);                                               \
  template Var scale<T>(Tape<T>&, Var, T);                                               \
  template Var gelu<T>(Tape<T>&, Var);                                                   \
  template Var layer_norm<T>(Tape<T>&, Var, Var, Var, T);                                \
  template Var softmax_rows<T>(Tape<T>&, Var, std::span<const std::uint8_t>);            \
  template Var gather_rows<T>(Tape<T>&, Var, std::span<const std::size_t>);              \
  template Var concat_rows<T>(Tape<T>&, const std::vector<Var>&);                        \
  template Var concat_cols<T>(Tape<T>&, const std::vector<Var>&);                        \
  template Var slice_cols<T>(Tape<T>&, Var, std::size_t, std::size_t);                   \
  template Var cross_entropy<T>(Tape<T>&, Var, std::span<const std::size_t>);            \
  template Var bce_with_logits<T>(Tape<T>&, Var, T);                                     \
  template Var sum<T>(Tape<T>&, Var);                                                    \
  template Var mean<T>(Tape<T>&, Var);                                                   \
  template Var weighted_sum<T>(Tape<T>&, Var, std::span<const T>);

UVLP_INSTANTIATE_OPS(float)
UVLP_INSTANTIATE_OPS(double)

#undef UVLP_INSTANTIATE_OPS

}  // namespace uvlp::nk
