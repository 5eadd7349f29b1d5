#include "zeus/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zeus/error.hpp"

namespace zeus {

const Vec& Trajectory::final_state() const {
  if (states.empty()) throw Error(ErrorCode::invalid_state, "empty trajectory");
  return states.back();
}

double mse(ConstVecView a, ConstVecView b) {
  require_same_size(a.size(), b.size(), "mse");
  if (a.empty()) throw Error(ErrorCode::shape_error, "mse of empty vectors");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

std::vector<double> per_step_mse(const Trajectory& a, const Trajectory& b) {
  require_same_size(a.steps(), b.steps(), "per_step_mse");
  std::vector<double> out(a.steps());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mse(a.states[i], b.states[i]);
  return out;
}

double psnr(ConstVecView a, ConstVecView b, double peak) {
  if (!(peak > 0.0)) throw Error(ErrorCode::invalid_metric, "psnr peak must be positive");
  const double err = mse(a, b);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / err);
}

double dynamic_range(ConstVecView x) {
  if (x.empty()) throw Error(ErrorCode::shape_error, "dynamic range of empty vector");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

double speedup_proxy(const Trajectory& accelerated, const Trajectory& baseline) {
  if (accelerated.nfe == 0 || baseline.nfe == 0) {
    throw Error(ErrorCode::invalid_metric, "speedup needs non-zero NFE on both runs");
  }
  return static_cast<double>(baseline.nfe) / static_cast<double>(accelerated.nfe);
}

}  // namespace zeus
