#include "zeus/parameterization.hpp"

#include <cmath>
#include <string>

#include "zeus/error.hpp"

namespace zeus {

namespace {

constexpr double kDegenerateDet = 1e-12;

}  // namespace

std::string_view to_string(Parameterization p) noexcept {
  switch (p) {
    case Parameterization::epsilon: return "epsilon";
    case Parameterization::x0: return "x0";
    case Parameterization::v: return "v";
    case Parameterization::score: return "score";
    case Parameterization::flow: return "flow";
  }
  return "unknown";
}

Parameterization parse_parameterization(std::string_view name) {
  for (auto p : kAllParameterizations) {
    if (to_string(p) == name) return p;
  }
  throw Error(ErrorCode::invalid_argument, "unknown parameterization '" + std::string(name) + "'");
}

TargetCoeffs target_coeffs(Parameterization p, const ScheduleValues& sv) {
  switch (p) {
    case Parameterization::epsilon: return {1.0, 0.0};
    case Parameterization::x0: return {0.0, 1.0};
    case Parameterization::v: return {sv.alpha, -sv.sigma};
    case Parameterization::score:
      if (sv.sigma == 0.0) {
        throw Error(ErrorCode::degenerate_parameterization, "score target undefined at sigma = 0");
      }
      return {-1.0 / sv.sigma, 0.0};
    case Parameterization::flow: return {sv.dsigma, sv.dalpha};
  }
  return {};
}

ReconstructionCoeffs reconstruction_coeffs(Parameterization p, const ScheduleValues& sv) {
  // x0 prediction is the identity readout for every s, including sigma = 0.
  if (p == Parameterization::x0) return {0.0, 1.0};
  const TargetCoeffs c = target_coeffs(p, sv);
  const double det = sv.alpha * c.u - sv.sigma * c.v;
  if (!(std::abs(det) >= kDegenerateDet)) {
    throw Error(ErrorCode::degenerate_parameterization,
                std::string(to_string(p)) + ": |det| = " + std::to_string(std::abs(det)));
  }
  return {c.u / det, -sv.sigma / det};
}

ReconstructionCoeffs reconstruction_coeffs(Parameterization p, const Schedule& sched, double s) {
  return reconstruction_coeffs(p, sched.eval(s));
}

Vec reconstruct_x0(Parameterization p, ConstVecView x, ConstVecView psi, const ScheduleValues& sv) {
  require_same_size(x.size(), psi.size(), "reconstruct_x0");
  const ReconstructionCoeffs c = reconstruction_coeffs(p, sv);
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = c.a * x[i] + c.b * psi[i];
  return out;
}

Vec reconstruct_x0(Parameterization p, ConstVecView x, ConstVecView psi, const Schedule& sched,
                   double s) {
  return reconstruct_x0(p, x, psi, sched.eval(s));
}

Vec convert_target(ConstVecView psi, Parameterization from, Parameterization to, ConstVecView x,
                   const Schedule& sched, double s) {
  require_same_size(x.size(), psi.size(), "convert_target");
  const ScheduleValues sv = sched.eval(s);
  if (from == to) return Vec(psi.begin(), psi.end());
  const Vec x0 = reconstruct_x0(from, x, psi, sv);
  if (to == Parameterization::x0) return x0;
  const TargetCoeffs c = target_coeffs(to, sv);
  if (c.u != 0.0 && sv.sigma == 0.0) {
    throw Error(ErrorCode::singular_conversion, "noise estimate needs sigma > 0");
  }
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double eps = c.u != 0.0 ? (x[i] - sv.alpha * x0[i]) / sv.sigma : 0.0;
    out[i] = c.u * eps + c.v * x0[i];
  }
  return out;
}

}  // namespace zeus
