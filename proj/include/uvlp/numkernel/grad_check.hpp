#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "uvlp/numkernel/param_store.hpp"
#include "uvlp/numkernel/tape.hpp"

namespace uvlp::nk {

struct GradCheckOptions {
  double step = 1e-5;
  /// Entries checked per tensor; 0 checks every entry.
  std::size_t samples_per_tensor = 0;
  /// Denominator floor of the relative error; below it the check is absolute.
  double denominator_floor = 1e-4;
  std::uint64_t seed = 0;
};

struct ParamGradReport {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0;
  double max_abs_error = 0;
};

/// |a − n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

/// Compares the tape gradient of `loss_fn` with central finite differences
/// for every named parameter. `prepare` (optional) runs on each fresh tape,
/// e.g. to inject a backward fault.
std::vector<ParamGradReport> check_gradients(
    ParamStore<double>& params, const std::function<Var(Tape<double>&)>& loss_fn,
    const GradCheckOptions& options, const std::function<void(Tape<double>&)>& prepare = {});

}  // namespace uvlp::nk
