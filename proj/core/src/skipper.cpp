#include "zeus/skipper.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "zeus/analysis.hpp"
#include "zeus/error.hpp"

namespace zeus {

PredictorStrategy PredictorStrategy::lagrange(int k) {
  if (k < 1 || k > kMaxLagrangeOrder) {
    throw Error(ErrorCode::invalid_argument, "lagrange order must be in [1, 6], got " + std::to_string(k));
  }
  return {StrategyTag::lagrange, k};
}

std::string to_string(const PredictorStrategy& strategy) {
  switch (strategy.tag) {
    case StrategyTag::zeus_interleave: return "zeus";
    case StrategyTag::reuse_only: return "reuse";
    case StrategyTag::predictor_only: return "chain";
    case StrategyTag::lagrange: return "lagrange:" + std::to_string(strategy.order);
  }
  return "unknown";
}

PredictorStrategy parse_strategy(std::string_view name) {
  if (name == "zeus") return PredictorStrategy::zeus();
  if (name == "reuse") return PredictorStrategy::reuse();
  if (name == "chain") return PredictorStrategy::chain();
  constexpr std::string_view prefix = "lagrange:";
  if (name.starts_with(prefix)) {
    const std::string_view digits = name.substr(prefix.size());
    int k = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && end == digits.data() + digits.size()) return PredictorStrategy::lagrange(k);
  }
  throw Error(ErrorCode::invalid_argument, "unknown strategy '" + std::string(name) + "'");
}

int StepPlan::fresh_count() const noexcept {
  int n = 0;
  for (const auto& label : labels) n += label.full ? 1 : 0;
  return n;
}

bool StepPlan::in_skip_region(int i) const noexcept {
  return i >= warm_steps && i < steps() - cool_steps;
}

StepPlan StepPlan::all_full(int steps) {
  StepPlan plan;
  plan.labels.assign(static_cast<std::size_t>(steps), StepLabel::Full());
  return plan;
}

StepPlan make_step_plan(int steps, int r, double warm_frac, double cool_frac) {
  if (!(warm_frac >= 0.0 && warm_frac < 1.0) || !(cool_frac >= 0.0 && cool_frac < 1.0) ||
      !(warm_frac + cool_frac < 1.0)) {
    throw Error(ErrorCode::invalid_plan, "need warm, cool in [0, 1) with warm + cool < 1");
  }
  if (r < 0) throw Error(ErrorCode::invalid_plan, "r must be non-negative");
  if (steps < r + 2) {
    throw Error(ErrorCode::invalid_plan,
                "T = " + std::to_string(steps) + " is too short for r = " + std::to_string(r));
  }
  StepPlan plan;
  plan.r = r;
  plan.warm_frac = warm_frac;
  plan.cool_frac = cool_frac;
  if (r == 0) {
    plan.labels.assign(static_cast<std::size_t>(steps), StepLabel::Full());
    return plan;
  }
  plan.warm_steps = static_cast<int>(std::floor(warm_frac * steps + 0.5));
  plan.cool_steps = static_cast<int>(std::floor(cool_frac * steps + 0.5));
  if (plan.warm_steps + plan.cool_steps > steps) {
    throw Error(ErrorCode::invalid_plan, "warm-up and cool-down overlap");
  }
  plan.labels.reserve(static_cast<std::size_t>(steps));
  plan.labels.assign(static_cast<std::size_t>(plan.warm_steps), StepLabel::Full());
  const int middle = steps - plan.warm_steps - plan.cool_steps;
  for (int i = 0; i < middle; ++i) {
    const int j = i % (r + 1);
    plan.labels.push_back(j == 0 ? StepLabel::Full() : StepLabel::Reduced(j));
  }
  plan.labels.insert(plan.labels.end(), static_cast<std::size_t>(plan.cool_steps), StepLabel::Full());
  return plan;
}

void validate_plan(const StepPlan& plan) {
  if (plan.labels.empty() || !plan.labels.front().full) {
    throw Error(ErrorCode::invalid_plan, "first step must be full");
  }
  int since_full = 0;
  for (int i = 0; i < plan.steps(); ++i) {
    const StepLabel& label = plan.labels[static_cast<std::size_t>(i)];
    if (label.full) {
      if (label.offset != 0) throw Error(ErrorCode::invalid_plan, "full step with offset");
      since_full = 0;
      continue;
    }
    ++since_full;
    if (label.offset != since_full || label.offset > plan.r) {
      throw Error(ErrorCode::invalid_plan, "reduced step " + std::to_string(i) + " has offset " +
                                               std::to_string(label.offset));
    }
  }
}

ObservedInfoSet observe(ConstVecView psi_t, ConstVecView psi_hat_prev, int t) {
  require_same_size(psi_t.size(), psi_hat_prev.size(), "observe");
  ObservedInfoSet info{Vec(psi_t.begin(), psi_t.end()), Vec(psi_t.size()), t};
  for (std::size_t i = 0; i < psi_t.size(); ++i) info.delta[i] = psi_t[i] - psi_hat_prev[i];
  return info;
}

ObservedInfoSet observe_first(ConstVecView psi_t, int t) {
  return {Vec(psi_t.begin(), psi_t.end()), Vec(psi_t.size(), 0.0), t};
}

Vec predict(const PredictorStrategy& strategy, const ObservedInfoSet& info, int j,
            std::span<const FreshSample> history) {
  if (j < 1) throw Error(ErrorCode::invalid_argument, "prediction offset must be >= 1");
  require_same_size(info.psi.size(), info.delta.size(), "predict");
  Vec out = info.psi;
  switch (strategy.tag) {
    case StrategyTag::zeus_interleave:
      if (j % 2 == 1) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += info.delta[i];
      }
      return out;
    case StrategyTag::reuse_only:
      return out;
    case StrategyTag::predictor_only:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += j * info.delta[i];
      return out;
    case StrategyTag::lagrange: {
      const auto needed = static_cast<std::size_t>(strategy.order) + 1;
      if (history.size() < needed) {
        throw Error(ErrorCode::history_underflow, "lagrange:" + std::to_string(strategy.order) +
                                                      " needs " + std::to_string(needed) +
                                                      " fresh samples, have " +
                                                      std::to_string(history.size()));
      }
      std::vector<long long> nodes(needed);
      for (std::size_t m = 0; m < needed; ++m) {
        nodes[m] = static_cast<long long>(history[m].t) - history[0].t;
      }
      const std::vector<double> w = lagrange_weights_at(nodes, -static_cast<long long>(j));
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t m = 0; m < needed; ++m) {
        require_same_size(history[m].psi.size(), out.size(), "predict history");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[m] * history[m].psi[i];
      }
      return out;
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown strategy");
}

Predictor::Predictor(PredictorStrategy strategy) : strategy_(strategy) {}

Vec Predictor::committed_previous() const {
  if (last_offset_ == 0) return info_->psi;
  PredictorStrategy effective = strategy_;
  if (strategy_.tag == StrategyTag::lagrange) {
    const int available = static_cast<int>(history_.size()) - 1;
    if (available < 1) return info_->psi;
    effective.order = std::min(strategy_.order, available);
  }
  return predict(effective, *info_, last_offset_, history_);
}

void Predictor::fresh(ConstVecView psi, int t) {
  if (info_) {
    const Vec previous = committed_previous();
    info_ = observe(psi, previous, t);
  } else {
    info_ = observe_first(psi, t);
  }
  last_offset_ = 0;
  if (strategy_.tag == StrategyTag::lagrange) {
    history_.insert(history_.begin(), FreshSample{t, Vec(psi.begin(), psi.end())});
    if (history_.size() > static_cast<std::size_t>(strategy_.order) + 1) history_.pop_back();
  }
}

Vec Predictor::reduced(int j) {
  if (!info_) throw Error(ErrorCode::invalid_state, "reduced step before any fresh evaluation");
  last_offset_ = j;
  return committed_previous();
}

std::size_t Predictor::retained_vectors() const noexcept {
  return (info_ ? 2 : 0) + history_.size();
}

Trajectory run_accelerated(Denoiser& den, const StepPlan& plan, const PredictorStrategy& strategy,
                           SolverKind solver, Parameterization p, const Schedule& sched,
                           const TimeGrid& grid, ConstVecView x1, const StepObserver& on_step) {
  if (plan.steps() != grid.steps()) {
    throw Error(ErrorCode::invalid_plan, "plan has " + std::to_string(plan.steps()) +
                                             " steps, grid has " + std::to_string(grid.steps()));
  }
  validate_plan(plan);

  Trajectory traj;
  traj.initial.assign(x1.begin(), x1.end());
  traj.states.reserve(static_cast<std::size_t>(plan.steps()));
  traj.psis.reserve(static_cast<std::size_t>(plan.steps()));
  traj.fresh.reserve(static_cast<std::size_t>(plan.steps()));

  SolverState state = initial_state(traj.initial, grid);
  Predictor predictor(strategy);
  for (int i = 0; i < plan.steps(); ++i) {
    const int t = grid.steps() - i;
    const StepLabel& label = plan.labels[static_cast<std::size_t>(i)];
    Vec psi;
    if (label.full) {
      psi = den.evaluate(state.x, grid.s(t), t);
      predictor.fresh(psi, t);
      ++traj.nfe;
    } else {
      den.skip(t);
      psi = predictor.reduced(label.offset);
    }
    if (on_step) on_step(t, predictor);
    state = solver_step(solver, state, psi, p, sched, grid);
    traj.states.push_back(state.x);
    traj.psis.push_back(std::move(psi));
    traj.fresh.push_back(label.full);
  }
  return traj;
}

}  // namespace zeus
