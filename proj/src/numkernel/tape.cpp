#include "uvlp/numkernel/tape.hpp"

#include <numeric>

namespace uvlp::nk {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Constant: return "constant";
    case OpKind::Param: return "param";
    case OpKind::MatMul: return "matmul";
    case OpKind::MatMulNT: return "matmul_nt";
    case OpKind::Add: return "add";
    case OpKind::AddBias: return "add_bias";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Scale: return "scale";
    case OpKind::Gelu: return "gelu";
    case OpKind::LayerNorm: return "layer_norm";
    case OpKind::Softmax: return "softmax";
    case OpKind::GatherRows: return "gather_rows";
    case OpKind::ConcatRows: return "concat_rows";
    case OpKind::SliceCols: return "slice_cols";
    case OpKind::ConcatCols: return "concat_cols";
    case OpKind::CrossEntropy: return "cross_entropy";
    case OpKind::BceWithLogits: return "bce_with_logits";
    case OpKind::Sum: return "sum";
    case OpKind::WeightedSum: return "weighted_sum";
  }
  return "unknown";
}

template <typename T>
Var Tape<T>::constant(Tensor<T> t) {
  Node n;
  n.kind = OpKind::Constant;
  n.shape = std::move(t.shape);
  n.value = std::move(t.values);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::param(Tensor<T>& p) {
  if (auto it = bound_.find(&p); it != bound_.end()) return Var{it->second};
  Node n;
  n.kind = OpKind::Param;
  n.shape = p.shape;
  n.param = &p;
  n.needs_grad = grad_enabled_ && p.requires_grad;
  nodes_.push_back(std::move(n));
  auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
  bound_.emplace(&p, id);
  return Var{id};
}

template <typename T>
Var Tape<T>::record(OpKind kind, Shape shape, std::vector<T> value,
                    std::initializer_list<Var> inputs, BackwardFn backward) {
  return record(kind, std::move(shape), std::move(value), std::vector<Var>(inputs),
                std::move(backward));
}

template <typename T>
Var Tape<T>::record(OpKind kind, Shape shape, std::vector<T> value, const std::vector<Var>& inputs,
                    BackwardFn backward) {
  Node n;
  n.kind = kind;
  n.shape = std::move(shape);
  n.value = std::move(value);
  if (grad_enabled_) {
    for (Var in : inputs) n.needs_grad = n.needs_grad || nodes_.at(in.id).needs_grad;
  }
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
const std::vector<T>& Tape<T>::value(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.param ? n.param->values : n.value;
}

template <typename T>
std::vector<T>& Tape<T>::grad(Var v) {
  Node& n = nodes_.at(v.id);
  if (n.grad.empty()) n.grad.assign(numel(n.shape), T{0});
  return n.grad;
}

template <typename T>
void Tape<T>::backward(Var loss) {
  Node& root = nodes_.at(loss.id);
  if (numel(root.shape) != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " + shape_str(root.shape));
  }
  if (!root.needs_grad) return;
  grad(loss)[0] = T{1};
  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, id);
  }
  for (Node& n : nodes_) {
    if (!n.param || n.grad.empty()) continue;
    Tensor<T>& p = *n.param;
    if (p.grad.empty()) p.grad.assign(p.values.size(), T{0});
    for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += n.grad[i];
  }
}

template <typename T>
void Tape<T>::reset() {
  nodes_.clear();
  bound_.clear();
}

template class Tape<float>;
template class Tape<double>;

}  // namespace uvlp::nk
