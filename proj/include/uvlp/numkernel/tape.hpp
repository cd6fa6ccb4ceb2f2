#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "uvlp/numkernel/tensor.hpp"

namespace uvlp::nk {

enum class OpKind : std::uint8_t {
  Constant,
  Param,
  MatMul,
  MatMulNT,
  Add,
  AddBias,
  Sub,
  Mul,
  Scale,
  Gelu,
  LayerNorm,
  Softmax,
  GatherRows,
  ConcatRows,
  SliceCols,
  ConcatCols,
  CrossEntropy,
  BceWithLogits,
  Sum,
  WeightedSum,
};

std::string_view op_name(OpKind kind);

/// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t id = std::numeric_limits<std::uint32_t>::max();
  bool valid() const { return id != std::numeric_limits<std::uint32_t>::max(); }
};

/// Reverse-mode tape. Ops append nodes in execution order; backward() walks
/// them in reverse. Parameter leaves point at externally owned tensors and
/// receive their gradient (accumulated) when backward() finishes.
///
/// A tape is single-owner and must not be shared across threads.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  Var constant(Tensor<T> t);
  /// Binds `p` to the tape. Binding the same tensor twice returns the same Var.
  Var param(Tensor<T>& p);

  /// Appends a computed node. `backward` is dropped when no input needs grad.
  Var record(OpKind kind, Shape shape, std::vector<T> value, std::initializer_list<Var> inputs,
             BackwardFn backward);
  Var record(OpKind kind, Shape shape, std::vector<T> value, const std::vector<Var>& inputs,
             BackwardFn backward);

  const std::vector<T>& value(Var v) const;
  const Shape& shape(Var v) const { return nodes_.at(v.id).shape; }
  bool needs_grad(Var v) const { return nodes_.at(v.id).needs_grad; }
  OpKind kind(Var v) const { return nodes_.at(v.id).kind; }

  /// Gradient buffer of node `v`, allocated (zeroed) on first access.
  std::vector<T>& grad(Var v);
  /// Gradient of node `v` during/after backward; empty if none reached it.
  const std::vector<T>& grad_or_empty(Var v) const { return nodes_.at(v.id).grad; }

  /// Runs reverse-mode differentiation from a scalar loss. Parameter gradients
  /// are added to the bound tensors' `grad`. Throws on a non-scalar loss.
  void backward(Var loss);
  void reset();

  std::size_t size() const { return nodes_.size(); }
  bool grad_enabled() const { return grad_enabled_; }

  /// Test fixture: multiplies the backward contribution of every op of `kind`
  /// by `factor`. Used only as a negative control for gradient checking.
  void set_fault(OpKind kind, T factor) { fault_kind_ = kind, fault_factor_ = factor, fault_ = true; }
  T fault_factor(OpKind kind) const { return fault_ && fault_kind_ == kind ? fault_factor_ : T{1}; }

 private:
  struct Node {
    OpKind kind = OpKind::Constant;
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;
    Tensor<T>* param = nullptr;
    bool needs_grad = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor<T>*, std::uint32_t> bound_;
  bool grad_enabled_;
  bool fault_ = false;
  OpKind fault_kind_ = OpKind::Constant;
  T fault_factor_ = T{1};
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace uvlp::nk
