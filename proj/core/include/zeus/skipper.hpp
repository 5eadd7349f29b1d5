#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zeus/metrics.hpp"
#include "zeus/oracle.hpp"
#include "zeus/parameterization.hpp"
#include "zeus/schedule.hpp"
#include "zeus/solver.hpp"
#include "zeus/types.hpp"

namespace zeus {

enum class StrategyTag { zeus_interleave, reuse_only, predictor_only, lagrange };

/// How reduced steps are filled in from the last fresh evaluation.
struct PredictorStrategy {
  StrategyTag tag = StrategyTag::zeus_interleave;
  /// Lagrange order k (k + 1 nodes); unused by the other tags.
  int order = 0;

  static constexpr int kMaxLagrangeOrder = 6;

  static PredictorStrategy zeus() { return {StrategyTag::zeus_interleave, 0}; }
  static PredictorStrategy reuse() { return {StrategyTag::reuse_only, 0}; }
  static PredictorStrategy chain() { return {StrategyTag::predictor_only, 0}; }
  /// Throws invalid_argument unless 1 <= k <= 6.
  static PredictorStrategy lagrange(int k);

  friend bool operator==(const PredictorStrategy&, const PredictorStrategy&) = default;
};

/// "zeus" | "reuse" | "chain" | "lagrange:k".
std::string to_string(const PredictorStrategy& strategy);
PredictorStrategy parse_strategy(std::string_view name);

struct StepLabel {
  bool full = true;
  /// Distance j >= 1 from the most recent full step; 0 for full steps.
  int offset = 0;

  static StepLabel Full() { return {true, 0}; }
  static StepLabel Reduced(int j) { return {false, j}; }

  friend bool operator==(const StepLabel&, const StepLabel&) = default;
};

/// Labels in sampling order: labels[i] belongs to step t = T - i.
struct StepPlan {
  std::vector<StepLabel> labels;
  int r = 0;
  double warm_frac = 0.0;
  double cool_frac = 0.0;
  int warm_steps = 0;
  int cool_steps = 0;

  int steps() const noexcept { return static_cast<int>(labels.size()); }
  int fresh_count() const noexcept;
  /// True for sampling positions between the warm-up and cool-down runs.
  bool in_skip_region(int i) const noexcept;

  static StepPlan all_full(int steps);
};

/// Uniform 1:r plan. round(warm_frac T) leading and round(cool_frac T)
/// trailing steps are full (round half up); the middle is tiled with
/// [Full, Reduced(1), ..., Reduced(r)] and a short tail block keeps its
/// leading Full. r = 0 yields an all-full plan.
/// Throws invalid_plan on bad fractions or T < r + 2.
StepPlan make_step_plan(int steps, int r, double warm_frac, double cool_frac);

/// Checks the structural invariants; throws invalid_plan with the first violation.
void validate_plan(const StepPlan& plan);

/// {psi_t, psi_t - psi_hat_{t+1}}: the only state the interleaved predictor keeps.
struct ObservedInfoSet {
  Vec psi;
  Vec delta;
  int anchor_t = 0;
};

ObservedInfoSet observe(ConstVecView psi_t, ConstVecView psi_hat_prev, int t);
/// First fresh step of a trajectory: nothing committed before it, delta = 0.
ObservedInfoSet observe_first(ConstVecView psi_t, int t);

/// A fresh evaluation kept for Lagrange extrapolation.
struct FreshSample {
  int t = 0;
  Vec psi;
};

/// Value for the reduced step j positions after `info.anchor_t`.
///   zeus:    psi + delta for odd j, psi for even j
///   reuse:   psi
///   chain:   psi + j delta
///   lagrange(k): extrapolation through the k + 1 newest fresh samples
///                (newest first), nodes in grid units.
/// Throws history_underflow when lagrange has fewer than k + 1 samples.
Vec predict(const PredictorStrategy& strategy, const ObservedInfoSet& info, int j,
            std::span<const FreshSample> history = {});

/// Causal predictor state for one trajectory.
class Predictor {
 public:
  explicit Predictor(PredictorStrategy strategy);

  /// Records a fresh evaluation at step t and rebuilds the observed information
  /// set against whatever was committed at the previous step.
  void fresh(ConstVecView psi, int t);
  /// Predicts (and commits) reduced step j after the current anchor. Lagrange
  /// runs at the highest order the fresh history supports, up to k.
  Vec reduced(int j);

  const std::optional<ObservedInfoSet>& info() const noexcept { return info_; }
  /// Number of d-vectors currently held.
  std::size_t retained_vectors() const noexcept;

 private:
  Vec committed_previous() const;

  PredictorStrategy strategy_;
  std::optional<ObservedInfoSet> info_;
  int last_offset_ = 0;
  std::vector<FreshSample> history_;
};

using StepObserver = std::function<void(int t, const Predictor&)>;

/// Runs the sampler over `plan`: fresh steps call the denoiser, reduced steps
/// take the predictor's value, and every step feeds its psi to the solver.
Trajectory run_accelerated(Denoiser& den, const StepPlan& plan, const PredictorStrategy& strategy,
                           SolverKind solver, Parameterization p, const Schedule& sched,
                           const TimeGrid& grid, ConstVecView x1,
                           const StepObserver& on_step = {});

}  // namespace zeus
