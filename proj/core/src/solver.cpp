#include "zeus/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zeus/error.hpp"

namespace zeus {

namespace {

void check_step(const SolverState& state, ConstVecView psi) {
  if (state.t <= 0) {
    throw Error(ErrorCode::past_end_of_trajectory, "no step below t = 0");
  }
  require_same_size(state.x.size(), psi.size(), "solver step");
}

// x0 and eps estimates at the current node.
void split_prediction(ConstVecView x, ConstVecView psi, Parameterization p, const ScheduleValues& sv,
                      Vec& x0, Vec& eps) {
  x0 = reconstruct_x0(p, x, psi, sv);
  eps.resize(x.size());
  if (sv.sigma == 0.0) {
    throw Error(ErrorCode::singular_conversion, "noise estimate needs sigma > 0");
  }
  for (std::size_t i = 0; i < x.size(); ++i) eps[i] = (x[i] - sv.alpha * x0[i]) / sv.sigma;
}

}  // namespace

std::string_view to_string(SolverKind kind) noexcept {
  switch (kind) {
    case SolverKind::euler: return "euler";
    case SolverKind::dpmpp2m: return "dpmpp2m";
  }
  return "unknown";
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "euler") return SolverKind::euler;
  if (name == "dpmpp2m") return SolverKind::dpmpp2m;
  throw Error(ErrorCode::invalid_argument, "unknown solver '" + std::string(name) + "'");
}

SolverState initial_state(Vec x, const TimeGrid& grid) {
  SolverState state;
  state.x = std::move(x);
  state.t = grid.steps();
  return state;
}

SolverState euler_step(const SolverState& state, ConstVecView psi, Parameterization p,
                       const Schedule& sched, const TimeGrid& grid) {
  check_step(state, psi);
  SolverState next;
  next.t = state.t - 1;
  const double s_now = grid.s(state.t);
  const double s_next = grid.s(next.t);
  next.x = state.x;
  if (p == Parameterization::flow) {
    const double ds = s_next - s_now;
    for (std::size_t i = 0; i < next.x.size(); ++i) next.x[i] += ds * psi[i];
    return next;
  }
  const ScheduleValues now = sched.eval(s_now);
  const ScheduleValues to = sched.eval(s_next);
  Vec x0, eps;
  split_prediction(state.x, psi, p, now, x0, eps);
  for (std::size_t i = 0; i < next.x.size(); ++i) next.x[i] = to.alpha * x0[i] + to.sigma * eps[i];
  return next;
}

SolverState dpmpp2m_step(const SolverState& state, ConstVecView psi, Parameterization p,
                         const Schedule& sched, const TimeGrid& grid) {
  check_step(state, psi);
  SolverState next;
  next.t = state.t - 1;
  const ScheduleValues now = sched.eval(grid.s(state.t));
  const ScheduleValues to = sched.eval(grid.s(next.t));
  if (now.sigma == 0.0) throw Error(ErrorCode::log_snr_undefined, "current sigma is zero");
  const double lambda_now = now.log_snr();
  const Vec x0 = reconstruct_x0(p, state.x, psi, now);

  next.x.resize(state.x.size());
  if (to.sigma == 0.0) {
    // Infinite log-SNR step: the update collapses to alpha x0.
    for (std::size_t i = 0; i < x0.size(); ++i) next.x[i] = to.alpha * x0[i];
    return next;
  }

  const double h = to.log_snr() - lambda_now;
  Vec denoised = x0;
  if (!state.history.empty()) {
    const HistoryEntry& prev = state.history.back();
    const double ratio = (lambda_now - prev.lambda) / h;
    const double c_prev = 1.0 / (2.0 * ratio);
    for (std::size_t i = 0; i < x0.size(); ++i) {
      denoised[i] = (1.0 + c_prev) * x0[i] - c_prev * prev.x0[i];
    }
  }
  const double keep = to.sigma / now.sigma;
  const double gain = -to.alpha * std::expm1(-h);
  for (std::size_t i = 0; i < x0.size(); ++i) next.x[i] = keep * state.x[i] + gain * denoised[i];

  next.history = state.history;
  next.history.push_back({lambda_now, x0});
  if (next.history.size() > SolverState::kMaxHistory) next.history.erase(next.history.begin());
  return next;
}

SolverState solver_step(SolverKind kind, const SolverState& state, ConstVecView psi,
                        Parameterization p, const Schedule& sched, const TimeGrid& grid) {
  switch (kind) {
    case SolverKind::euler: return euler_step(state, psi, p, sched, grid);
    case SolverKind::dpmpp2m: return dpmpp2m_step(state, psi, p, sched, grid);
  }
  throw Error(ErrorCode::invalid_argument, "unknown solver");
}

Vec reference_solve(const Denoiser& den, const Schedule& sched, ConstVecView x1, int fine_steps) {
  const GaussianMixture* gmm = den.mixture();
  if (gmm == nullptr) {
    throw Error(ErrorCode::reference_requires_oracle, "reference needs an analytic oracle");
  }
  if (fine_steps < 1) throw Error(ErrorCode::invalid_argument, "fine_steps must be positive");
  require_same_size(x1.size(), gmm->dim(), "reference_solve");

  // dx/du = 2u v(u^2), integrated from u = 1 to u = 0.
  auto rhs = [&](double u, const Vec& x) {
    const double s = std::min(1.0, std::max(0.0, u * u));
    const ScheduleValues sv = sched.eval(s);
    const Posterior post = posterior(*gmm, x, sv);
    Vec k(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      k[i] = 2.0 * u * (sv.dalpha * post.x0[i] + sv.dsigma * post.eps[i]);
    }
    return k;
  };
  auto axpy = [](const Vec& x, double a, const Vec& k) {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * k[i];
    return out;
  };

  Vec x(x1.begin(), x1.end());
  const double h = -1.0 / fine_steps;
  for (int n = 0; n < fine_steps; ++n) {
    const double u = 1.0 + n * h;
    const Vec k1 = rhs(u, x);
    const Vec k2 = rhs(u + 0.5 * h, axpy(x, 0.5 * h, k1));
    const Vec k3 = rhs(u + 0.5 * h, axpy(x, 0.5 * h, k2));
    const Vec k4 = rhs(u + h, axpy(x, h, k3));
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  return x;
}

Vec pf_ode_drift(const GaussianMixture& gmm, const Schedule& sched, ConstVecView x, double s) {
  const ScheduleValues sv = sched.eval(s);
  if (!(sv.alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "drift needs alpha > 0");
  const double f = sv.dalpha / sv.alpha;
  const double g2 = 2.0 * sv.sigma * sv.dsigma - 2.0 * f * sv.sigma * sv.sigma;
  const Vec grad = score(gmm, x, sched, s);
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f * x[i] - 0.5 * g2 * grad[i];
  return out;
}

}  // namespace zeus
