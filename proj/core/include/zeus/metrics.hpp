#pragma once

#include <cstdint>
#include <vector>

#include "zeus/types.hpp"

namespace zeus {

/// Per-step record of one sampling run. Entry i belongs to the step that
/// starts at t = T - i; `states[i]` is the state after that step.
struct Trajectory {
  Vec initial;
  std::vector<Vec> states;
  std::vector<Vec> psis;
  std::vector<bool> fresh;
  std::uint64_t nfe = 0;

  std::size_t steps() const noexcept { return states.size(); }
  const Vec& final_state() const;
};

double mse(ConstVecView a, ConstVecView b);
std::vector<double> per_step_mse(const Trajectory& a, const Trajectory& b);

/// 10 log10(peak^2 / mse); +infinity when the inputs coincide.
double psnr(ConstVecView a, ConstVecView b, double peak);

/// max - min of the entries; the PSNR peak for latents with no fixed range.
double dynamic_range(ConstVecView x);

/// baseline.nfe / accelerated.nfe. Throws invalid_metric on a zero count.
double speedup_proxy(const Trajectory& accelerated, const Trajectory& baseline);

}  // namespace zeus
