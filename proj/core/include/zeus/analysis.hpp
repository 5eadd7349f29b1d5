#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "zeus/oracle.hpp"
#include "zeus/parameterization.hpp"
#include "zeus/rng.hpp"
#include "zeus/schedule.hpp"
#include "zeus/skipper.hpp"
#include "zeus/solver.hpp"

namespace zeus {

// ---------------------------------------------------------------------------
// Linear extrapolation weights
// ---------------------------------------------------------------------------

/// Exact rational with a positive denominator, kept in lowest terms.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d = 1);

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator+(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;
};

struct Cov2 {
  double a11 = 1.0;
  double a12 = 0.0;
  double a22 = 1.0;
};

/// GLS weights c^T (X^T S^-1 X)^-1 X^T S^-1 for predicting an affine trend at
/// `target` from observations at two nodes. Throws gls_singular when the
/// covariance is not positive definite or the nodes coincide.
std::array<double, 2> blue_weights(double node_a, double node_b, double target, const Cov2& cov);

struct WeightVector {
  std::vector<double> nodes;
  double target = 0.0;
  std::vector<double> weights;
};

/// Lagrange basis values l_m(target) for distinct integer nodes, computed in
/// exact rational arithmetic.
std::vector<Rational> lagrange_weights_exact(std::span<const long long> nodes, long long target);
std::vector<double> lagrange_weights_at(std::span<const long long> nodes, long long target);

/// Nodes {0, ..., k}, target -offset. Throws invalid_argument unless 1 <= k <= 6, offset >= 1.
WeightVector lagrange_weights(int k, int offset);

struct WeightNormReport {
  int k = 0;
  long long norm_sq = 0;            ///< sum_j w_j^2 at offset 1, exact
  long long central_binomial = 0;   ///< C(2k+2, k+1)
  long long binomial_sum = 0;       ///< sum_{m=1}^{k+1} C(k+1, m)^2 = C(2k+2, k+1) - 1
};

WeightNormReport weight_norm_sq(int k);

long long binomial(int n, int k);

// ---------------------------------------------------------------------------
// Bias and variance of multi-step strategies
// ---------------------------------------------------------------------------

/// Smooth scalar test trend with derivatives up to fourth order.
struct TestFunction {
  std::string name;
  std::function<double(double)> f;
  std::array<std::function<double(double)>, 4> d;  ///< d[0] = f', ..., d[3] = f''''
};

TestFunction test_sin();
TestFunction test_exp();
/// 2 s^3 - 3 s^2 + s + 0.5
TestFunction test_cubic();
/// Half M2 s^2.
TestFunction test_quadratic(double m2);
/// beta0 + beta1 s.
TestFunction test_affine(double beta0, double beta1);

struct StrategyErrorReport {
  PredictorStrategy strategy;
  int j = 0;
  double delta = 0.0;
  double sigma = 0.0;
  long long n_trials = 0;
  double empirical_bias = 0.0;
  double bias_stderr = 0.0;
  double empirical_variance = 0.0;
  double variance_stderr = 0.0;
  double predicted_bias = 0.0;      ///< two-term Taylor expansion
  double leading_bias = 0.0;        ///< lowest-order non-vanishing term
  double predicted_variance = 0.0;
};

/// Closed-form bias expansions for zeus / reuse / chain at offset j.
double predicted_bias(const PredictorStrategy& strategy, int j, double delta, double d1, double d2);
double leading_bias(const PredictorStrategy& strategy, int j, double delta, double d1, double d2);
double predicted_variance(const PredictorStrategy& strategy, int j, double sigma);

/// Monte-Carlo over psi_u = phi(s_u) + eta_u at u in {s_t, s_t + delta},
/// predicting phi(s_t - j delta) through `predict`. With sigma = 0 a single
/// deterministic evaluation is used.
StrategyErrorReport strategy_bias_variance(const PredictorStrategy& strategy, const TestFunction& phi,
                                           double s_t, double delta, int j, double sigma,
                                           long long n_trials, CounterRng& rng);

/// Least-squares slope of log y against log x.
double log_log_slope(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Minimax and achievability
// ---------------------------------------------------------------------------

struct MinimaxWitness {
  std::function<double(double)> plus;
  std::function<double(double)> minus;
  double separation = 0.0;
};

/// g(s) = M2 delta^2 p((s - s_t) / delta), p(u) = u (u - 1) / 2, and its negation.
MinimaxWitness minimax_witness(double m2, double delta, double s_t = 0.5);

struct AchievabilityRow {
  std::string function;
  double delta = 0.0;
  double two_point_error = 0.0;
  double two_point_bound = 0.0;   ///< M2 delta^2
  double reuse_error = 0.0;
  double reuse_bound = 0.0;       ///< M1 delta
  double curvature_ratio = 0.0;   ///< (second difference / delta^2) / phi''(s_t)
  bool passed = false;
};

struct AchievabilityReport {
  std::vector<AchievabilityRow> rows;
  /// Observed convergence rate of the curvature ratio to 1, per function.
  std::vector<std::pair<std::string, double>> curvature_rates;
  bool passed = false;
};

/// M1, M2 are sup |phi'|, sup |phi''| over [0, 1] (sampled densely).
AchievabilityReport achievability_check(std::span<const TestFunction> family,
                                        std::span<const double> deltas, double s_t = 0.5);

// ---------------------------------------------------------------------------
// Interpolation conditioning
// ---------------------------------------------------------------------------

enum class NodeKind { equispaced, chebyshev };

/// max over a 10^4-point grid on [0, k] of sum_j |l_j(x)| for k + 1 nodes.
/// Throws invalid_argument unless 2 <= k <= 20.
double lebesgue_constant(int k, NodeKind kind);

// ---------------------------------------------------------------------------
// Population trend of oracle outputs
// ---------------------------------------------------------------------------

struct TrendRow {
  double s = 0.0;
  std::size_t coord = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double expected = 0.0;
  bool passed = false;
};

struct TrendReport {
  Parameterization parameterization = Parameterization::epsilon;
  std::vector<TrendRow> rows;
  bool passed = false;
};

/// E[psi | s] under x_s ~ q_s against b(s) E[x0]: 0 for epsilon and score,
/// E[x0] for x0, -sigma_s E[x0] for v, alpha'_s E[x0] for flow. Each
/// coordinate passes within 3 standard errors.
TrendReport trend_check(Parameterization p, const GaussianMixture& gmm, const Schedule& sched,
                        std::span<const double> s_grid, long long n_samples, CounterRng& rng);

double expected_trend(Parameterization p, const ScheduleValues& sv, double mean_x0);

// ---------------------------------------------------------------------------
// Solver convergence
// ---------------------------------------------------------------------------

struct ConvergenceReport {
  std::vector<int> steps;
  std::vector<double> errors;
  double order = 0.0;  ///< minus the fitted log-log slope of error against T
};

/// Error of the all-full sampler against reference_solve at each T.
ConvergenceReport convergence_order(const OracleDenoiser& oracle, SolverKind solver,
                                    const Schedule& sched, ConstVecView x1,
                                    std::span<const int> steps, int fine_steps);

}  // namespace zeus
