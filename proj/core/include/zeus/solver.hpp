#pragma once

#include <string_view>
#include <vector>

#include "zeus/oracle.hpp"
#include "zeus/parameterization.hpp"
#include "zeus/schedule.hpp"
#include "zeus/types.hpp"

namespace zeus {

enum class SolverKind { euler, dpmpp2m };

std::string_view to_string(SolverKind kind) noexcept;
SolverKind parse_solver_kind(std::string_view name);

/// Multistep memory entry: log-SNR and data prediction at an earlier step.
struct HistoryEntry {
  double lambda = 0.0;
  Vec x0;
};

struct SolverState {
  Vec x;
  int t = 0;
  /// Newest last; at most two entries.
  std::vector<HistoryEntry> history;

  static constexpr std::size_t kMaxHistory = 2;
};

SolverState initial_state(Vec x, const TimeGrid& grid);

/// One step t -> t-1. The flow parameterization integrates dx = psi ds
/// directly; every other parameterization takes the first-order exponential
/// (DDIM) update x <- alpha_{t-1} x0 + sigma_{t-1} eps.
SolverState euler_step(const SolverState& state, ConstVecView psi, Parameterization p,
                       const Schedule& sched, const TimeGrid& grid);

/// DPM-Solver++(2M) data-prediction step. The first step, and any step that
/// lands on sigma = 0, uses the first-order update.
SolverState dpmpp2m_step(const SolverState& state, ConstVecView psi, Parameterization p,
                         const Schedule& sched, const TimeGrid& grid);

SolverState solver_step(SolverKind kind, const SolverState& state, ConstVecView psi,
                        Parameterization p, const Schedule& sched, const TimeGrid& grid);

/// Classical RK4 on the probability-flow velocity alpha'_s E[x0|x] + sigma'_s E[eps|x]
/// from s = 1 to s = 0 with `fine_steps` steps. Integrates in u = sqrt(s) so the
/// sqrt(s) behaviour of VP noise levels near the data end stays smooth.
/// Throws reference_requires_oracle for denoisers without an analytic mixture.
Vec reference_solve(const Denoiser& den, const Schedule& sched, ConstVecView x1, int fine_steps);

/// The probability-flow drift f(s) x - 1/2 g(s)^2 grad log q_s(x), assembled
/// from the marginal score. Needs alpha_s > 0 and sigma_s > 0.
Vec pf_ode_drift(const GaussianMixture& gmm, const Schedule& sched, ConstVecView x, double s);

}  // namespace zeus
