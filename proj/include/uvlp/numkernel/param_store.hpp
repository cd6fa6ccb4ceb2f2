#pragma once

#include <memory>
#include <string>
#include <vector>

#include "uvlp/numkernel/tensor.hpp"

namespace uvlp::nk {

template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T> tensor;
};

/// Ordered collection of named trainable tensors. Addresses are stable for
/// the lifetime of the store so tapes can bind to them.
template <typename T>
class ParamStore {
 public:
  Tensor<T>& add(std::string name, Tensor<T> t) {
    t.requires_grad = true;
    params_.push_back(std::make_unique<NamedParam<T>>(NamedParam<T>{std::move(name), std::move(t)}));
    return params_.back()->tensor;
  }

  std::size_t size() const { return params_.size(); }
  NamedParam<T>& operator[](std::size_t i) { return *params_[i]; }
  const NamedParam<T>& operator[](std::size_t i) const { return *params_[i]; }

  Tensor<T>* find(const std::string& name) {
    for (auto& p : params_)
      if (p->name == name) return &p->tensor;
    return nullptr;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->tensor.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p->tensor.zero_grad();
  }

 private:
  std::vector<std::unique_ptr<NamedParam<T>>> params_;
};

}  // namespace uvlp::nk
