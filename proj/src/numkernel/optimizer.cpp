#include "uvlp/numkernel/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace uvlp::nk {

double scheduled_lr(const AdamConfig& cfg, std::int64_t step) {
  const auto total = static_cast<double>(cfg.total_steps);
  const double warmup = cfg.warmup_fraction * total;
  const auto s = static_cast<double>(step);
  if (s >= total) return 0.0;
  if (s < warmup) return cfg.peak_lr * s / warmup;
  if (total <= warmup) return 0.0;
  return std::max(0.0, cfg.peak_lr * (total - s) / (total - warmup));
}

template <typename T>
Adam<T>::Adam(AdamConfig cfg, const ParamStore<T>& params) : cfg_(cfg) {
  if (cfg_.total_steps < 1) throw std::invalid_argument("adam: total_steps must be >= 1");
  if (cfg_.warmup_fraction < 0.0 || cfg_.warmup_fraction > 1.0)
    throw std::invalid_argument("adam: warmup_fraction must lie in [0,1]");
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_.emplace_back(params[i].tensor.size(), T{0});
    v_.emplace_back(params[i].tensor.size(), T{0});
  }
}

template <typename T>
void Adam<T>::step(ParamStore<T>& params) {
  if (step_ >= cfg_.total_steps) {
    throw std::logic_error("adam: step " + std::to_string(step_) + " exceeds total_steps " +
                           std::to_string(cfg_.total_steps));
  }
  const double lr = scheduled_lr(cfg_, step_);

  T clip_scale = T(1);
  if (cfg_.clip_norm > 0.0) {
    double sq = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i)
      for (T g : params[i].tensor.grad) sq += static_cast<double>(g) * g;
    const double norm = std::sqrt(sq);
    if (norm > cfg_.clip_norm) clip_scale = static_cast<T>(cfg_.clip_norm / norm);
  }

  const auto t = static_cast<double>(step_ + 1);
  const T b1 = static_cast<T>(cfg_.beta1);
  const T b2 = static_cast<T>(cfg_.beta2);
  const T bc1 = static_cast<T>(1.0 - std::pow(cfg_.beta1, t));
  const T bc2 = static_cast<T>(1.0 - std::pow(cfg_.beta2, t));
  const T eps = static_cast<T>(cfg_.eps);
  const T lr_t = static_cast<T>(lr);
  const T decay = static_cast<T>(lr * cfg_.weight_decay);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = params[i].tensor;
    auto& m = m_[i];
    auto& v = v_[i];
    const bool has_grad = p.has_grad();
    for (std::size_t j = 0; j < p.values.size(); ++j) {
      const T g = has_grad ? p.grad[j] * clip_scale : T(0);
      m[j] = b1 * m[j] + (T(1) - b1) * g;
      v[j] = b2 * v[j] + (T(1) - b2) * g * g;
      const T mhat = m[j] / bc1;
      const T vhat = v[j] / bc2;
      if (decay != T(0)) p.values[j] -= decay * p.values[j];
      p.values[j] -= lr_t * mhat / (std::sqrt(vhat) + eps);
    }
  }
  ++step_;
}

template class Adam<float>;
template class Adam<double>;

}  // namespace uvlp::nk
