#pragma once

#include <cstdint>
#include <vector>

#include "uvlp/numkernel/param_store.hpp"

namespace uvlp::nk {

struct AdamConfig {
  double peak_lr = 6e-5;
  double warmup_fraction = 0.1;
  std::int64_t total_steps = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Decoupled weight decay; 0 disables it.
  double weight_decay = 0.0;
  /// Global gradient-norm clip; 0 disables it.
  double clip_norm = 0.0;
};

/// Linear warmup from 0 to the peak over the first warmup_fraction of steps,
/// then linear decay to 0 at total_steps.
double scheduled_lr(const AdamConfig& cfg, std::int64_t step);

/// Adam with bias correction, driven by scheduled_lr.
template <typename T>
class Adam {
 public:
  Adam(AdamConfig cfg, const ParamStore<T>& params);

  const AdamConfig& config() const { return cfg_; }
  std::int64_t step_count() const { return step_; }
  double current_lr() const { return scheduled_lr(cfg_, step_); }

  /// Applies one update from the gradients held in `params` and advances the
  /// step counter. Parameters without a gradient are treated as zero-grad.
  /// Throws std::logic_error once step_count() reaches total_steps.
  void step(ParamStore<T>& params);

  std::vector<std::vector<T>>& first_moments() { return m_; }
  std::vector<std::vector<T>>& second_moments() { return v_; }
  const std::vector<std::vector<T>>& first_moments() const { return m_; }
  const std::vector<std::vector<T>>& second_moments() const { return v_; }
  void set_step_count(std::int64_t s) { step_ = s; }

 private:
  AdamConfig cfg_;
  std::int64_t step_ = 0;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace uvlp::nk
