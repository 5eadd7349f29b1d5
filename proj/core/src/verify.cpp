#include <cmath>
#include <tuple>

#include "harness_io.hpp"
#include "json.hpp"
#include "zeus/analysis.hpp"
#include "zeus/error.hpp"
#include "zeus/harness.hpp"

namespace zeus {
namespace {

using json = nlohmann::json;

struct SuiteReport {
  explicit SuiteReport(std::string n) : name(std::move(n)) {}

  std::string name;
  json checks = json::array();
  json notes = json::array();
  bool passed = true;
  std::vector<std::pair<std::string, std::string>> tables;  // file name, CSV text

  void check(const std::string& what, double predicted, double empirical, double tolerance, bool ok) {
    checks.push_back({{"name", what},
                      {"predicted", predicted},
                      {"empirical", empirical},
                      {"tolerance", tolerance},
                      {"passed", ok}});
    passed = passed && ok;
  }
};

std::string strategy_label(const PredictorStrategy& s) {
  switch (s.tag) {
    case StrategyTag::predictor_only:
      return "chain";
    case StrategyTag::reuse_only:
      return "reuse";
    case StrategyTag::zeus_interleave:
      return "zeus";
    case StrategyTag::lagrange:
      break;
  }
  return to_string(s);
}

SuiteReport run_blue(std::uint64_t seed) {
  SuiteReport rep{"blue"};
  CounterRng rng = CounterRng::for_stream("verify", seed, "blue");
  CsvWriter csv("s,delta,cov_a11,cov_a12,cov_a22,w_now,w_prev,max_abs_err");
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double s = 0.05 + 0.9 * rng.uniform();
    const double delta = 1e-3 + 0.1 * rng.uniform();
    Cov2 cov;
    if (i >= 100) {
      // Random SPD covariance: the two-node solution does not depend on it.
      const double l11 = 0.2 + rng.uniform(), l21 = rng.uniform() - 0.5, l22 = 0.2 + rng.uniform();
      cov = {l11 * l11, l11 * l21, l21 * l21 + l22 * l22};
    }
    const auto w = blue_weights(s, s + delta, s - delta, cov);
    const double err = std::max(std::abs(w[0] - 2.0), std::abs(w[1] + 1.0));
    worst = std::max(worst, err);
    csv.field(s).field(delta).field(cov.a11).field(cov.a12).field(cov.a22).field(w[0]).field(w[1]).field(err);
    csv.end_row();
  }
  rep.check("max |w - (2, -1)| over 200 draws", 0.0, worst, 1e-12, worst <= 1e-12);
  rep.tables.emplace_back("blue.csv", csv.str());
  return rep;
}

SuiteReport run_lagrange() {
  SuiteReport rep{"lagrange"};
  CsvWriter csv("k,weights,norm_sq,binomial_sum,central_binomial,growth_ratio");
  long long prev = 0;
  for (int k = 1; k <= PredictorStrategy::kMaxLagrangeOrder; ++k) {
    std::vector<long long> nodes;
    for (int j = 0; j <= k; ++j) nodes.push_back(j);
    const auto w = lagrange_weights_exact(nodes, -1);
    bool exact = true;
    std::string joined;
    for (int j = 0; j <= k; ++j) {
      const long long expect = (j % 2 == 0 ? 1 : -1) * binomial(k + 1, j + 1);
      exact = exact && w[static_cast<std::size_t>(j)] == Rational(expect);
      if (j) joined += ' ';
      joined += std::to_string(w[static_cast<std::size_t>(j)].num);
    }
    rep.check("k=" + std::to_string(k) + " weights equal (-1)^j C(k+1, j+1)", 1.0, exact ? 1.0 : 0.0, 0.0, exact);
    const WeightNormReport nr = weight_norm_sq(k);
    const long long expect_norm = nr.central_binomial - 1;
    rep.check("k=" + std::to_string(k) + " norm^2 = C(2k+2, k+1) - 1", static_cast<double>(expect_norm),
              static_cast<double>(nr.norm_sq), 0.0, nr.norm_sq == expect_norm && nr.binomial_sum == expect_norm);
    double ratio = 0.0;
    if (prev > 0) {
      ratio = static_cast<double>(nr.norm_sq) / static_cast<double>(prev);
      if (k <= 6) rep.check("growth ratio k=" + std::to_string(k - 1) + "->" + std::to_string(k), 3.5, ratio, 0.0,
                            ratio >= 3.5);
    }
    prev = nr.norm_sq;
    csv.field(static_cast<std::int64_t>(k))
        .field(joined)
        .field(static_cast<std::int64_t>(nr.norm_sq))
        .field(static_cast<std::int64_t>(nr.binomial_sum))
        .field(static_cast<std::int64_t>(nr.central_binomial))
        .field(ratio);
    csv.end_row();
  }
  rep.notes.push_back(
      "The squared weight norm is C(2k+2, k+1) - 1 (k=1 gives 5), one less than the central binomial "
      "coefficient sometimes quoted for it. Growth is still of order 4^k.");
  rep.tables.emplace_back("lagrange.csv", csv.str());
  return rep;
}

SuiteReport run_bias_variance(std::uint64_t seed) {
  SuiteReport rep{"bias_variance"};
  const std::vector<PredictorStrategy> closed{PredictorStrategy::chain(), PredictorStrategy::zeus(),
                                              PredictorStrategy::reuse()};

  // Variance at sigma = 1.
  CsvWriter var_csv("strategy,j,n_trials,empirical_variance,variance_stderr,predicted_variance,empirical_bias,"
                    "bias_stderr,predicted_bias");
  constexpr long long kTrials = 100000;
  const TestFunction sin_fn = test_sin();
  for (const auto& st : closed) {
    for (int j = 1; j <= 4; ++j) {
      CounterRng rng = CounterRng::for_stream("verify", seed, "variance/" + strategy_label(st) + std::to_string(j));
      const auto r = strategy_bias_variance(st, sin_fn, 0.5, 0.02, j, 1.0, kTrials, rng);
      const double rel = std::abs(r.empirical_variance / r.predicted_variance - 1.0);
      rep.check(strategy_label(st) + " j=" + std::to_string(j) + " variance", r.predicted_variance,
                r.empirical_variance, 0.03, rel <= 0.03);
      rep.check(strategy_label(st) + " j=" + std::to_string(j) + " noisy bias within 3 SE", r.predicted_bias,
                r.empirical_bias, 3.0 * r.bias_stderr,
                std::abs(r.empirical_bias - r.predicted_bias) <= 3.0 * r.bias_stderr);
      var_csv.field(strategy_label(st))
          .field(static_cast<std::int64_t>(j))
          .field(static_cast<std::int64_t>(r.n_trials))
          .field(r.empirical_variance)
          .field(r.variance_stderr)
          .field(r.predicted_variance)
          .field(r.empirical_bias)
          .field(r.bias_stderr)
          .field(r.predicted_bias);
      var_csv.end_row();
    }
  }

  // Noise-free bias against the closed forms.
  CsvWriter bias_csv("function,strategy,j,delta,bias,leading_bias,ratio_leading,two_term_bias,ratio_two_term");
  const std::vector<double> deltas{1e-2, 5e-3, 2.5e-3};
  CounterRng unused(0);
  for (const TestFunction& phi : {test_sin(), test_exp()}) {
    for (const auto& st : closed) {
      for (int j = 1; j <= 3; ++j) {
        double last_ratio = 0.0, last_two = 0.0;
        for (double d : deltas) {
          const auto r = strategy_bias_variance(st, phi, 0.5, d, j, 0.0, 1, unused);
          last_ratio = r.empirical_bias / r.leading_bias;
          last_two = r.empirical_bias / r.predicted_bias;
          bias_csv.field(phi.name)
              .field(strategy_label(st))
              .field(static_cast<std::int64_t>(j))
              .field(d)
              .field(r.empirical_bias)
              .field(r.leading_bias)
              .field(last_ratio)
              .field(r.predicted_bias)
              .field(last_two);
          bias_csv.end_row();
        }
        const std::string tag = phi.name + " " + strategy_label(st) + " j=" + std::to_string(j);
        rep.check(tag + " bias / leading term at delta=2.5e-3", 1.0, last_ratio, 0.02,
                  std::abs(last_ratio - 1.0) <= 0.02);
        rep.check(tag + " bias / two-term expansion at delta=2.5e-3", 1.0, last_two, 0.02,
                  std::abs(last_two - 1.0) <= 0.02);
      }
    }
  }

  // Squared bias scales as delta^4 for the chained predictor and delta^2 for reuse.
  CsvWriter scale_csv("strategy,j,delta,squared_bias");
  const std::vector<double> fine{2e-2, 1e-2, 5e-3, 2.5e-3, 1.25e-3};
  for (const auto& [st, slope] : {std::pair{PredictorStrategy::chain(), 4.0}, std::pair{PredictorStrategy::reuse(), 2.0},
                                  std::pair{PredictorStrategy::zeus(), 2.0}}) {
    for (int j : {1, 2, 3}) {
      // zeus at j = 1 has no first-order term.
      const double expect = (st.tag == StrategyTag::zeus_interleave && j == 1) ? 4.0 : slope;
      std::vector<double> sq;
      for (double d : fine) {
        const auto r = strategy_bias_variance(st, sin_fn, 0.5, d, j, 0.0, 1, unused);
        sq.push_back(r.empirical_bias * r.empirical_bias);
        scale_csv.field(strategy_label(st)).field(static_cast<std::int64_t>(j)).field(d).field(sq.back());
        scale_csv.end_row();
      }
      const double fitted = log_log_slope(fine, sq);
      rep.check(strategy_label(st) + " j=" + std::to_string(j) + " log-log slope of squared bias", expect, fitted,
                0.3, std::abs(fitted - expect) <= 0.3);
    }
  }

  rep.tables.emplace_back("variance.csv", var_csv.str());
  rep.tables.emplace_back("bias.csv", bias_csv.str());
  rep.tables.emplace_back("bias_scaling.csv", scale_csv.str());
  return rep;
}

SuiteReport run_minimax() {
  SuiteReport rep{"minimax"};
  CsvWriter csv("m2,delta,plus_at_now,plus_at_prev,minus_at_now,minus_at_prev,separation,expected");
  double worst_node = 0.0, worst_sep = 0.0;
  for (double m2 : {0.5, 1.0, 2.5}) {
    for (double d : {0.1, 0.02, 0.005}) {
      const double st = 0.5;
      const auto w = minimax_witness(m2, d, st);
      const double p0 = w.plus(st), p1 = w.plus(st + d), q0 = w.minus(st), q1 = w.minus(st + d);
      const double sep = w.plus(st - d) - w.minus(st - d);
      const double expect = 2.0 * m2 * d * d;
      worst_node = std::max({worst_node, std::abs(p0), std::abs(p1), std::abs(q0), std::abs(q1)});
      worst_sep = std::max(worst_sep, std::abs(sep - expect) / expect);
      csv.field(m2).field(d).field(p0).field(p1).field(q0).field(q1).field(sep).field(expect);
      csv.end_row();
    }
  }
  rep.check("witness value at observation nodes", 0.0, worst_node, 1e-14, worst_node <= 1e-14);
  rep.check("relative error of separation vs 2 M2 delta^2", 0.0, worst_sep, 1e-12, worst_sep <= 1e-12);

  const std::vector<TestFunction> family{test_sin(), test_exp(), test_cubic(), test_quadratic(2.0)};
  const std::vector<double> deltas{0.1, 0.05, 0.02, 0.01};
  const auto ach = achievability_check(family, deltas, 0.5);
  CsvWriter acsv("function,delta,two_point_error,two_point_bound,reuse_error,reuse_bound,curvature_ratio,passed");
  for (const auto& row : ach.rows) {
    acsv.field(row.function)
        .field(row.delta)
        .field(row.two_point_error)
        .field(row.two_point_bound)
        .field(row.reuse_error)
        .field(row.reuse_bound)
        .field(row.curvature_ratio)
        .field(static_cast<std::int64_t>(row.passed ? 1 : 0));
    acsv.end_row();
    rep.check(row.function + " delta=" + format_double(row.delta) + " two-point error <= M2 delta^2",
              row.two_point_bound, row.two_point_error, 0.0, row.passed);
  }
  rep.tables.emplace_back("minimax.csv", csv.str());
  rep.tables.emplace_back("achievability.csv", acsv.str());
  return rep;
}

SuiteReport run_lebesgue() {
  SuiteReport rep{"lebesgue"};
  CsvWriter csv("k,equispaced,chebyshev");
  std::vector<double> equi(21), cheb(21);
  for (int k = 2; k <= 20; ++k) {
    equi[static_cast<std::size_t>(k)] = lebesgue_constant(k, NodeKind::equispaced);
    cheb[static_cast<std::size_t>(k)] = lebesgue_constant(k, NodeKind::chebyshev);
    csv.field(static_cast<std::int64_t>(k)).field(equi[static_cast<std::size_t>(k)]).field(cheb[static_cast<std::size_t>(k)]);
    csv.end_row();
  }
  const double ratio = equi[10] / equi[5];
  rep.check("equispaced Lambda_10 / Lambda_5 > 10", 10.0, ratio, 0.0, ratio > 10.0);
  const double bound = 3.0 * std::log(20.0);
  rep.check("Chebyshev Lambda_20 < 3 log 20", bound, cheb[20], 0.0, cheb[20] < bound);
  rep.notes.push_back("Lambda_k is measured on [0, k] with a 10^4-point grid.");
  rep.tables.emplace_back("lebesgue.csv", csv.str());
  return rep;
}

SuiteReport run_trend(std::uint64_t seed) {
  SuiteReport rep{"trend"};
  CsvWriter csv("mixture,parameterization,s,coord,mean,std_error,expected,passed");
  const Schedule sched = Schedule::vp_cosine();
  const std::vector<double> grid{0.2, 0.5, 0.8};
  const GaussianMixture skewed = reference_mixture();
  const GaussianMixture symmetric({0.5, 0.5}, {{1.0, -0.5}, {-1.0, 0.5}}, {0.1, 0.1});
  for (const auto& [label, gmm] : {std::pair<std::string, const GaussianMixture*>{"reference", &skewed},
                                   std::pair<std::string, const GaussianMixture*>{"symmetric", &symmetric}}) {
    for (Parameterization p : kAllParameterizations) {
      CounterRng rng = CounterRng::for_stream("verify", seed, "trend/" + label + "/" + std::string(to_string(p)));
      const auto tr = trend_check(p, *gmm, sched, grid, 20000, rng);
      for (const auto& row : tr.rows) {
        csv.field(label)
            .field(to_string(p))
            .field(row.s)
            .field(static_cast<std::uint64_t>(row.coord))
            .field(row.mean)
            .field(row.std_error)
            .field(row.expected)
            .field(static_cast<std::int64_t>(row.passed ? 1 : 0));
        csv.end_row();
        rep.check(label + " " + std::string(to_string(p)) + " s=" + format_double(row.s) + " coord " +
                      std::to_string(row.coord),
                  row.expected, row.mean, 3.0 * row.std_error, row.passed);
      }
    }
  }
  rep.tables.emplace_back("trend.csv", csv.str());
  return rep;
}

SuiteReport run_convergence() {
  SuiteReport rep{"convergence"};
  CsvWriter csv("solver,T,error");
  const Schedule sched = Schedule::vp_cosine();
  const OracleDenoiser oracle(GaussianMixture::single({0.5}, 0.25), sched, Parameterization::epsilon);
  const Vec x1{0.8};
  const std::vector<int> steps{25, 50, 100, 200};
  for (const auto& [solver, order, tol] :
       {std::tuple{SolverKind::euler, 1.0, 0.15}, std::tuple{SolverKind::dpmpp2m, 2.0, 0.25}}) {
    const auto c = convergence_order(oracle, solver, sched, x1, steps, 4000);
    for (std::size_t i = 0; i < c.steps.size(); ++i) {
      csv.field(to_string(solver)).field(static_cast<std::int64_t>(c.steps[i])).field(c.errors[i]);
      csv.end_row();
    }
    rep.check(std::string(to_string(solver)) + " fitted order", order, c.order, tol,
              std::abs(c.order - order) <= tol);
  }
  rep.notes.push_back("Single Gaussian N(0.5, 0.25) in 1-D, vp_cosine schedule, x1 = 0.8, RK4 reference with 4000 steps.");
  rep.tables.emplace_back("convergence.csv", csv.str());
  return rep;
}

SuiteReport run_suite(VerifySuite s, std::uint64_t seed) {
  switch (s) {
    case VerifySuite::blue:
      return run_blue(seed);
    case VerifySuite::lagrange:
      return run_lagrange();
    case VerifySuite::bias_variance:
      return run_bias_variance(seed);
    case VerifySuite::minimax:
      return run_minimax();
    case VerifySuite::lebesgue:
      return run_lebesgue();
    case VerifySuite::trend:
      return run_trend(seed);
    case VerifySuite::convergence:
      return run_convergence();
    case VerifySuite::all:
      break;
  }
  throw Error(ErrorCode::invalid_argument, "suite 'all' is not a single suite");
}

}  // namespace

GaussianMixture reference_mixture() {
  return GaussianMixture({0.5, 0.3, 0.2}, {{1.5, 0.5}, {-1.0, 1.0}, {0.0, -1.5}}, {0.05, 0.1, 0.08});
}

std::string to_string(VerifySuite suite) {
  switch (suite) {
    case VerifySuite::blue:
      return "blue";
    case VerifySuite::lagrange:
      return "lagrange";
    case VerifySuite::bias_variance:
      return "bias_variance";
    case VerifySuite::minimax:
      return "minimax";
    case VerifySuite::lebesgue:
      return "lebesgue";
    case VerifySuite::trend:
      return "trend";
    case VerifySuite::convergence:
      return "convergence";
    case VerifySuite::all:
      return "all";
  }
  return "?";
}

VerifySuite parse_verify_suite(std::string_view name) {
  for (VerifySuite s : {VerifySuite::blue, VerifySuite::lagrange, VerifySuite::bias_variance, VerifySuite::minimax,
                        VerifySuite::lebesgue, VerifySuite::trend, VerifySuite::convergence, VerifySuite::all}) {
    if (name == to_string(s)) return s;
  }
  throw Error(ErrorCode::config_error, "unknown suite '" + std::string(name) +
                                           "' (expected blue, lagrange, bias_variance, minimax, lebesgue, trend, "
                                           "convergence or all)");
}

VerifyResult verify(VerifySuite suite, const std::filesystem::path& out, std::uint64_t seed) {
  std::vector<VerifySuite> selected;
  if (suite == VerifySuite::all) {
    selected = {VerifySuite::blue,    VerifySuite::lagrange, VerifySuite::bias_variance, VerifySuite::minimax,
                VerifySuite::lebesgue, VerifySuite::trend,   VerifySuite::convergence};
  } else {
    selected = {suite};
  }

  ensure_dir(out);
  VerifyResult res;
  res.passed = true;
  json report;
  report["suite"] = to_string(suite);
  report["seed"] = seed;
  json suites = json::object();
  for (VerifySuite s : selected) {
    SuiteReport r = run_suite(s, seed);
    suites[r.name] = {{"passed", r.passed}, {"checks", r.checks}, {"notes", r.notes}};
    for (const auto& [file, text] : r.tables) res.files.push_back(write_text(out / file, text));
    res.suites.push_back({s, r.passed});
    res.passed = res.passed && r.passed;
  }
  report["passed"] = res.passed;
  report["suites"] = suites;
  res.files.insert(res.files.begin(), write_text(out / "report.json", report.dump(2) + "\n"));
  return res;
}

}  // namespace zeus
