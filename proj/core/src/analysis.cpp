#include "zeus/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "zeus/error.hpp"

namespace zeus {

Rational::Rational(long long n, long long d) {
  if (d == 0) throw Error(ErrorCode::invalid_argument, "zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const long long g = std::gcd(n, d);
  num = g == 0 ? 0 : n / g;
  den = g == 0 ? 1 : d / g;
}

Rational operator*(const Rational& a, const Rational& b) {
  // Cross-reduce first to keep intermediates small.
  const long long g1 = std::gcd(a.num, b.den);
  const long long g2 = std::gcd(b.num, a.den);
  const long long n1 = g1 ? a.num / g1 : a.num, d2 = g1 ? b.den / g1 : b.den;
  const long long n2 = g2 ? b.num / g2 : b.num, d1 = g2 ? a.den / g2 : a.den;
  return Rational(n1 * n2, d1 * d2);
}

Rational operator+(const Rational& a, const Rational& b) {
  const long long g = std::gcd(a.den, b.den);
  return Rational(a.num * (b.den / g) + b.num * (a.den / g), a.den / g * b.den);
}

std::array<double, 2> blue_weights(double node_a, double node_b, double target, const Cov2& cov) {
  const double det_cov = cov.a11 * cov.a22 - cov.a12 * cov.a12;
  if (!(cov.a11 > 0.0) || !(det_cov > 0.0)) {
    throw Error(ErrorCode::gls_singular, "covariance is not positive definite");
  }
  if (node_a == node_b) throw Error(ErrorCode::gls_singular, "coincident nodes");
  // The weights are invariant under affine maps of the time axis; solve on
  // nodes {0, 1} so that small spacings do not cancel.
  const double span = node_b - node_a;
  target = (target - node_a) / span;
  node_a = 0.0;
  node_b = 1.0;

  // S^-1
  const double i11 = cov.a22 / det_cov, i12 = -cov.a12 / det_cov, i22 = cov.a11 / det_cov;
  // Rows of X are (1, node); M = X^T S^-1 X.
  const double x1[2] = {1.0, 1.0};
  const double x2[2] = {node_a, node_b};
  auto quad = [&](const double* u, const double* v) {
    return u[0] * (i11 * v[0] + i12 * v[1]) + u[1] * (i12 * v[0] + i22 * v[1]);
  };
  const double m11 = quad(x1, x1), m12 = quad(x1, x2), m22 = quad(x2, x2);
  const double det_m = m11 * m22 - m12 * m12;
  if (!(std::abs(det_m) > 0.0)) throw Error(ErrorCode::gls_singular, "normal matrix is singular");
  // g = M^-1 c with c = (1, target).
  const double g1 = (m22 * 1.0 - m12 * target) / det_m;
  const double g2 = (-m12 * 1.0 + m11 * target) / det_m;
  // w = S^-1 X g
  const double xg_a = g1 + node_a * g2;
  const double xg_b = g1 + node_b * g2;
  return {i11 * xg_a + i12 * xg_b, i12 * xg_a + i22 * xg_b};
}

std::vector<Rational> lagrange_weights_exact(std::span<const long long> nodes, long long target) {
  std::vector<Rational> out;
  out.reserve(nodes.size());
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    Rational w(1);
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      if (n == m) continue;
      if (nodes[m] == nodes[n]) throw Error(ErrorCode::invalid_argument, "repeated interpolation node");
      w = w * Rational(target - nodes[n], nodes[m] - nodes[n]);
    }
    out.push_back(w);
  }
  return out;
}

std::vector<double> lagrange_weights_at(std::span<const long long> nodes, long long target) {
  const auto exact = lagrange_weights_exact(nodes, target);
  std::vector<double> out(exact.size());
  std::transform(exact.begin(), exact.end(), out.begin(), [](const Rational& r) { return r.value(); });
  return out;
}

WeightVector lagrange_weights(int k, int offset) {
  if (k < 1 || k > PredictorStrategy::kMaxLagrangeOrder) {
    throw Error(ErrorCode::invalid_argument, "k must be in [1, 6]");
  }
  if (offset < 1) throw Error(ErrorCode::invalid_argument, "offset must be >= 1");
  std::vector<long long> nodes(static_cast<std::size_t>(k) + 1);
  std::iota(nodes.begin(), nodes.end(), 0LL);
  WeightVector wv;
  wv.nodes.assign(nodes.begin(), nodes.end());
  wv.target = -offset;
  wv.weights = lagrange_weights_at(nodes, -offset);
  return wv;
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long out = 1;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

WeightNormReport weight_norm_sq(int k) {
  if (k < 1 || k > PredictorStrategy::kMaxLagrangeOrder) {
    throw Error(ErrorCode::invalid_argument, "k must be in [1, 6]");
  }
  std::vector<long long> nodes(static_cast<std::size_t>(k) + 1);
  std::iota(nodes.begin(), nodes.end(), 0LL);
  WeightNormReport rep;
  rep.k = k;
  for (const Rational& w : lagrange_weights_exact(nodes, -1)) {
    if (w.den != 1) throw Error(ErrorCode::invalid_state, "non-integer extrapolation weight");
    rep.norm_sq += w.num * w.num;
  }
  rep.central_binomial = binomial(2 * k + 2, k + 1);
  for (int m = 1; m <= k + 1; ++m) rep.binomial_sum += binomial(k + 1, m) * binomial(k + 1, m);
  return rep;
}

TestFunction test_sin() {
  return {"sin",
          [](double s) { return std::sin(s); },
          {[](double s) { return std::cos(s); }, [](double s) { return -std::sin(s); },
           [](double s) { return -std::cos(s); }, [](double s) { return std::sin(s); }}};
}

TestFunction test_exp() {
  auto e = [](double s) { return std::exp(s); };
  return {"exp", e, {e, e, e, e}};
}

TestFunction test_cubic() {
  return {"cubic",
          [](double s) { return ((2.0 * s - 3.0) * s + 1.0) * s + 0.5; },
          {[](double s) { return (6.0 * s - 6.0) * s + 1.0; }, [](double s) { return 12.0 * s - 6.0; },
           [](double) { return 12.0; }, [](double) { return 0.0; }}};
}

TestFunction test_quadratic(double m2) {
  return {"quadratic",
          [m2](double s) { return 0.5 * m2 * s * s; },
          {[m2](double s) { return m2 * s; }, [m2](double) { return m2; }, [](double) { return 0.0; },
           [](double) { return 0.0; }}};
}

TestFunction test_affine(double beta0, double beta1) {
  return {"affine",
          [beta0, beta1](double s) { return beta0 + beta1 * s; },
          {[beta1](double) { return beta1; }, [](double) { return 0.0; }, [](double) { return 0.0; },
           [](double) { return 0.0; }}};
}

double predicted_bias(const PredictorStrategy& strategy, int j, double delta, double d1, double d2) {
  const double dd = delta * delta;
  switch (strategy.tag) {
    case StrategyTag::predictor_only:
      return -0.5 * j * (j + 1) * d2 * dd;
    case StrategyTag::reuse_only:
      return j * d1 * delta - 0.5 * j * j * d2 * dd;
    case StrategyTag::zeus_interleave: {
      const int k = j / 2;
      if (j % 2 == 0) return 2.0 * k * d1 * delta - 2.0 * k * k * d2 * dd;
      return 2.0 * k * d1 * delta - (2.0 * k * k + 2.0 * k + 1.0) * d2 * dd;
    }
    case StrategyTag::lagrange:
      break;
  }
  throw Error(ErrorCode::invalid_argument, "no closed form for " + to_string(strategy));
}

double leading_bias(const PredictorStrategy& strategy, int j, double delta, double d1, double d2) {
  switch (strategy.tag) {
    case StrategyTag::predictor_only:
      return -0.5 * j * (j + 1) * d2 * delta * delta;
    case StrategyTag::reuse_only:
      return j * d1 * delta;
    case StrategyTag::zeus_interleave:
      if (j == 1) return -d2 * delta * delta;
      return 2.0 * (j / 2) * d1 * delta;
    case StrategyTag::lagrange:
      break;
  }
  throw Error(ErrorCode::invalid_argument, "no closed form for " + to_string(strategy));
}

double predicted_variance(const PredictorStrategy& strategy, int j, double sigma) {
  const double s2 = sigma * sigma;
  switch (strategy.tag) {
    case StrategyTag::predictor_only:
      return (static_cast<double>(j + 1) * (j + 1) + static_cast<double>(j) * j) * s2;
    case StrategyTag::reuse_only:
      return s2;
    case StrategyTag::zeus_interleave:
      return j % 2 == 0 ? s2 : 5.0 * s2;
    case StrategyTag::lagrange:
      break;
  }
  throw Error(ErrorCode::invalid_argument, "no closed form for " + to_string(strategy));
}

StrategyErrorReport strategy_bias_variance(const PredictorStrategy& strategy, const TestFunction& phi,
                                           double s_t, double delta, int j, double sigma,
                                           long long n_trials, CounterRng& rng) {
  if (j < 1 || !(delta > 0.0) || !(sigma >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "need j >= 1, delta > 0, sigma >= 0");
  }
  StrategyErrorReport rep;
  rep.strategy = strategy;
  rep.j = j;
  rep.delta = delta;
  rep.sigma = sigma;

  const double anchor = phi.f(s_t);
  const double behind = phi.f(s_t + delta);
  const double truth = phi.f(s_t - j * delta);
  auto estimate = [&](double noise_now, double noise_behind) {
    const Vec now{anchor + noise_now};
    const Vec prev{behind + noise_behind};
    return predict(strategy, observe(now, prev, 0), j)[0];
  };

  if (sigma == 0.0) {
    rep.n_trials = 1;
    rep.empirical_bias = estimate(0.0, 0.0) - truth;
  } else {
    if (n_trials < 2) throw Error(ErrorCode::invalid_argument, "need at least two trials");
    rep.n_trials = n_trials;
    // Welford accumulation of the error around the truth.
    double mean = 0.0, m2 = 0.0;
    for (long long n = 1; n <= n_trials; ++n) {
      const double e1 = sigma * rng.normal();
      const double e2 = sigma * rng.normal();
      const double err = estimate(e1, e2) - truth;
      const double d = err - mean;
      mean += d / static_cast<double>(n);
      m2 += d * (err - mean);
    }
    const double var = m2 / static_cast<double>(n_trials - 1);
    rep.empirical_bias = mean;
    rep.empirical_variance = var;
    rep.bias_stderr = std::sqrt(var / static_cast<double>(n_trials));
    rep.variance_stderr = var * std::sqrt(2.0 / static_cast<double>(n_trials - 1));
  }

  const double d1 = phi.d[0](s_t);
  const double d2 = phi.d[1](s_t);
  rep.predicted_bias = predicted_bias(strategy, j, delta, d1, d2);
  rep.leading_bias = leading_bias(strategy, j, delta, d1, d2);
  rep.predicted_variance = predicted_variance(strategy, j, sigma);
  return rep;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "log_log_slope");
  if (x.size() < 2) throw Error(ErrorCode::invalid_argument, "need two points for a slope");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

MinimaxWitness minimax_witness(double m2, double delta, double s_t) {
  if (!(m2 > 0.0) || !(delta > 0.0)) throw Error(ErrorCode::invalid_argument, "need M2, delta > 0");
  auto g = [m2, delta, s_t](double s) {
    const double u = (s - s_t) / delta;
    return m2 * delta * delta * 0.5 * u * (u - 1.0);
  };
  return {g, [g](double s) { return -g(s); }, 2.0 * m2 * delta * delta};
}

AchievabilityReport achievability_check(std::span<const TestFunction> family,
                                        std::span<const double> deltas, double s_t) {
  AchievabilityReport rep;
  rep.passed = true;
  constexpr int kSupSamples = 10001;
  for (const TestFunction& phi : family) {
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < kSupSamples; ++i) {
      const double s = static_cast<double>(i) / (kSupSamples - 1);
      m1 = std::max(m1, std::abs(phi.d[0](s)));
      m2 = std::max(m2, std::abs(phi.d[1](s)));
    }
    const double curvature = phi.d[1](s_t);
    std::vector<double> curvature_errors;
    for (double delta : deltas) {
      AchievabilityRow row;
      row.function = phi.name;
      row.delta = delta;
      const double ahead = phi.f(s_t - delta);
      const double now = phi.f(s_t);
      const double behind = phi.f(s_t + delta);
      row.two_point_error = std::abs(ahead - (2.0 * now - behind));
      row.two_point_bound = m2 * delta * delta;
      row.reuse_error = std::abs(ahead - now);
      row.reuse_bound = m1 * delta;
      const double second_diff = behind - 2.0 * now + ahead;
      row.curvature_ratio = curvature != 0.0 ? second_diff / (delta * delta) / curvature : 1.0;
      // Relative slack absorbs rounding in the tight quadratic case.
      const double slack = 1e-9;
      row.passed = row.two_point_error <= row.two_point_bound * (1.0 + slack) + 1e-15 &&
                   row.reuse_error <= row.reuse_bound * (1.0 + slack) + 1e-15;
      rep.passed = rep.passed && row.passed;
      curvature_errors.push_back(std::abs(row.curvature_ratio - 1.0));
      rep.rows.push_back(row);
    }
    if (deltas.size() >= 2 && curvature != 0.0 && curvature_errors.front() > 1e-13) {
      std::vector<double> ds(deltas.begin(), deltas.end());
      rep.curvature_rates.emplace_back(phi.name, log_log_slope(ds, curvature_errors));
    }
  }
  return rep;
}

double lebesgue_constant(int k, NodeKind kind) {
  if (k < 2 || k > 20) throw Error(ErrorCode::invalid_argument, "k must be in [2, 20]");
  std::vector<double> nodes(static_cast<std::size_t>(k) + 1);
  for (int j = 0; j <= k; ++j) {
    nodes[static_cast<std::size_t>(j)] =
        kind == NodeKind::equispaced
            ? static_cast<double>(j)
            : 0.5 * k * (1.0 - std::cos((2.0 * j + 1.0) * std::numbers::pi / (2.0 * k + 2.0)));
  }
  constexpr int kGrid = 10000;
  double best = 0.0;
  for (int g = 0; g < kGrid; ++g) {
    const double x = static_cast<double>(k) * g / (kGrid - 1);
    double total = 0.0;
    for (std::size_t m = 0; m < nodes.size(); ++m) {
      double l = 1.0;
      for (std::size_t n = 0; n < nodes.size(); ++n) {
        if (n != m) l *= (x - nodes[n]) / (nodes[m] - nodes[n]);
      }
      total += std::abs(l);
    }
    best = std::max(best, total);
  }
  return best;
}

double expected_trend(Parameterization p, const ScheduleValues& sv, double mean_x0) {
  if (p == Parameterization::epsilon || p == Parameterization::score) return 0.0;
  return target_coeffs(p, sv).v * mean_x0;
}

TrendReport trend_check(Parameterization p, const GaussianMixture& gmm, const Schedule& sched,
                        std::span<const double> s_grid, long long n_samples, CounterRng& rng) {
  if (n_samples < 2) throw Error(ErrorCode::invalid_argument, "need at least two samples");
  TrendReport rep;
  rep.parameterization = p;
  rep.passed = true;
  const Vec mean_x0 = gmm.mean();
  const std::size_t d = gmm.dim();
  for (double s : s_grid) {
    const ScheduleValues sv = sched.eval(s);
    Vec mean(d, 0.0), m2(d, 0.0);
    Vec x(d);
    for (long long n = 1; n <= n_samples; ++n) {
      const Vec x0 = gmm.sample(rng);
      for (std::size_t k = 0; k < d; ++k) x[k] = sv.alpha * x0[k] + sv.sigma * rng.normal();
      const Vec psi = oracle_target(gmm, p, x, sv);
      for (std::size_t k = 0; k < d; ++k) {
        const double delta = psi[k] - mean[k];
        mean[k] += delta / static_cast<double>(n);
        m2[k] += delta * (psi[k] - mean[k]);
      }
    }
    for (std::size_t k = 0; k < d; ++k) {
      TrendRow row;
      row.s = s;
      row.coord = k;
      row.mean = mean[k];
      row.std_error = std::sqrt(m2[k] / static_cast<double>(n_samples - 1) / static_cast<double>(n_samples));
      row.expected = expected_trend(p, sv, mean_x0[k]);
      row.passed = std::abs(row.mean - row.expected) <= 3.0 * row.std_error + 1e-12;
      rep.passed = rep.passed && row.passed;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

ConvergenceReport convergence_order(const OracleDenoiser& oracle, SolverKind solver,
                                    const Schedule& sched, ConstVecView x1,
                                    std::span<const int> steps, int fine_steps) {
  ConvergenceReport rep;
  const Vec reference = reference_solve(oracle, sched, x1, fine_steps);
  std::vector<double> ts;
  for (int t : steps) {
    const TimeGrid grid(t);
    OracleDenoiser den(*oracle.mixture(), sched, oracle.parameterization());
    const Trajectory traj = run_accelerated(den, StepPlan::all_full(t), PredictorStrategy::reuse(), solver,
                                            oracle.parameterization(), sched, grid, x1);
    rep.steps.push_back(t);
    rep.errors.push_back(std::sqrt(mse(traj.final_state(), reference)));
    ts.push_back(static_cast<double>(t));
  }
  rep.order = -log_log_slope(ts, rep.errors);
  return rep;
}

}  // namespace zeus
