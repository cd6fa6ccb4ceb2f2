#include "uvlp/numkernel/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uvlp/numkernel/random.hpp"

namespace uvlp::nk {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

std::vector<ParamGradReport> check_gradients(ParamStore<double>& params,
                                             const std::function<Var(Tape<double>&)>& loss_fn,
                                             const GradCheckOptions& options,
                                             const std::function<void(Tape<double>&)>& prepare) {
  params.zero_grad();
  {
    Tape<double> tape;
    if (prepare) prepare(tape);
    tape.backward(loss_fn(tape));
  }

  auto eval = [&]() {
    Tape<double> tape(false);
    return tape.value(loss_fn(tape))[0];
  };

  Rng rng(options.seed);
  std::vector<ParamGradReport> reports;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& entry = params[p];
    auto& values = entry.tensor.values;
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (options.samples_per_tensor > 0 && idx.size() > options.samples_per_tensor) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(options.samples_per_tensor);
      std::sort(idx.begin(), idx.end());
    }
    ParamGradReport rep;
    rep.name = entry.name;
    for (std::size_t i : idx) {
      const double orig = values[i];
      values[i] = orig + options.step;
      const double up = eval();
      values[i] = orig - options.step;
      const double down = eval();
      values[i] = orig;
      const double numeric = (up - down) / (2.0 * options.step);
      const double analytic = entry.tensor.grad.empty() ? 0.0 : entry.tensor.grad[i];
      rep.max_rel_error =
          std::max(rep.max_rel_error, relative_error(analytic, numeric, options.denominator_floor));
      rep.max_abs_error = std::max(rep.max_abs_error, std::abs(analytic - numeric));
      ++rep.checked;
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace uvlp::nk
