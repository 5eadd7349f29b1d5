#pragma once

#include <array>
#include <string_view>

#include "zeus/schedule.hpp"
#include "zeus/types.hpp"

namespace zeus {

/// Regression target of the denoiser. Every tag is an affine readout
/// psi = u_s eps + v_s x0 of the clean sample and the noise.
enum class Parameterization { epsilon, x0, v, score, flow };

inline constexpr std::array<Parameterization, 5> kAllParameterizations = {
    Parameterization::epsilon, Parameterization::x0, Parameterization::v,
    Parameterization::score, Parameterization::flow};

std::string_view to_string(Parameterization p) noexcept;
Parameterization parse_parameterization(std::string_view name);

/// (u_s, v_s) with psi = u_s eps + v_s x0.
struct TargetCoeffs {
  double u = 0.0;
  double v = 0.0;
};

/// (a_s, b_s) with x0 = a_s x_s + b_s psi.
struct ReconstructionCoeffs {
  double a = 0.0;
  double b = 0.0;
};

/// Flow uses the general velocity (sigma'_s, alpha'_s); on the rectified path
/// this is (1, -1). Score uses the conditional convention (-1/sigma_s, 0) and
/// throws degenerate_parameterization when sigma_s == 0.
TargetCoeffs target_coeffs(Parameterization p, const ScheduleValues& sv);

ReconstructionCoeffs reconstruction_coeffs(Parameterization p, const ScheduleValues& sv);
ReconstructionCoeffs reconstruction_coeffs(Parameterization p, const Schedule& sched, double s);

Vec reconstruct_x0(Parameterization p, ConstVecView x, ConstVecView psi, const Schedule& sched,
                   double s);
Vec reconstruct_x0(Parameterization p, ConstVecView x, ConstVecView psi, const ScheduleValues& sv);

/// Re-expresses a target under another parameterization at the same (x_s, s):
/// x0 from `from`, then eps = (x_s - alpha x0) / sigma, then psi' = u' eps + v' x0.
Vec convert_target(ConstVecView psi, Parameterization from, Parameterization to, ConstVecView x,
                   const Schedule& sched, double s);

}  // namespace zeus
