#include <cmath>

#include "test_util.hpp"
#include "zeus/oracle.hpp"

using namespace zeus;

namespace {

const GaussianMixture& std_normal_1d() {
  static const GaussianMixture g = GaussianMixture::single({0.0}, 1.0);
  return g;
}

GaussianMixture three_component() {
  return GaussianMixture({0.5, 0.3, 0.2}, {{1.5, 0.5}, {-1.0, 1.0}, {0.0, -1.5}}, {0.05, 0.1, 0.08});
}

Trace synthetic_trace(std::uint32_t steps, std::uint64_t dim) {
  Trace tr;
  tr.steps = steps;
  tr.dim = dim;
  for (std::uint32_t i = 0; i < steps; ++i) {
    TraceRecord rec;
    rec.step = steps - i;
    rec.s = static_cast<double>(rec.step) / steps;
    rec.psi.assign(dim, static_cast<float>(i) * 0.5f);
    tr.records.push_back(std::move(rec));
  }
  return tr;
}

}  // namespace

TEST(Oracle, ConjugateGaussianPosteriorMean) {
  const auto sched = Schedule::vp_cosine();
  for (double s : {0.1, 0.5, 0.9}) {
    const double alpha = sched.eval(s).alpha;
    for (double x : {-2.0, 0.3, 1.7}) {
      EXPECT_NEAR(posterior_mean(std_normal_1d(), Vec{x}, sched, s)[0], alpha * x, 1e-12);
    }
  }
}

TEST(Oracle, PointMassLimit) {
  const auto g = GaussianMixture::single({0.7, -0.2}, 1e-14);
  const Vec m = posterior_mean(g, Vec{3.0, 1.0}, Schedule::vp_cosine(), 0.6);
  EXPECT_NEAR(m[0], 0.7, 1e-10);
  EXPECT_NEAR(m[1], -0.2, 1e-10);
}

TEST(Oracle, SymmetricMixtureAtOrigin) {
  const GaussianMixture g({0.5, 0.5}, {{2.0}, {-2.0}}, {0.3, 0.3});
  EXPECT_NEAR(posterior_mean(g, Vec{0.0}, Schedule::vp_linear(), 0.4)[0], 0.0, 1e-15);
}

TEST(Oracle, ScoreOfStandardNormal) {
  const auto sched = Schedule::vp_linear();
  for (double x : {-1.5, 0.0, 2.25}) EXPECT_NEAR(score(std_normal_1d(), Vec{x}, sched, 0.63)[0], -x, 1e-12);
}

TEST(Oracle, ScoreMatchesPosteriorIdentity) {
  const auto g = GaussianMixture::single({0.4}, 0.3);
  const auto sched = Schedule::vp_cosine();
  const double s = 0.55;
  const auto sv = sched.eval(s);
  const Vec x{0.9};
  const double expect = -(x[0] - sv.alpha * posterior_mean(g, x, sched, s)[0]) / (sv.sigma * sv.sigma);
  EXPECT_NEAR(score(g, x, sched, s)[0], expect, 1e-12);
}

TEST(Oracle, ScoreMatchesFiniteDifferenceOfLogDensity) {
  const auto g = three_component();
  const auto sched = Schedule::vp_cosine();
  CounterRng rng(21);
  const double h = 1e-5;
  for (int i = 0; i < 50; ++i) {
    const double s = 0.1 + 0.85 * rng.uniform();
    Vec x{1.5 * rng.normal(), 1.5 * rng.normal()};
    const Vec sc = score(g, x, sched, s);
    for (std::size_t k = 0; k < 2; ++k) {
      Vec hi = x, lo = x;
      hi[k] += h;
      lo[k] -= h;
      const double fd = (log_density(g, hi, sched, s) - log_density(g, lo, sched, s)) / (2 * h);
      EXPECT_NEAR(fd, sc[k], 1e-6 * std::max(1.0, std::abs(sc[k])));
    }
  }
}

TEST(Oracle, PosteriorMeanFromMarginalScore) {
  // E[x0|x] = x / alpha + sigma^2 / alpha * score at 1000 random points.
  const auto g = three_component();
  const auto sched = Schedule::vp_linear();
  CounterRng rng(22);
  for (int i = 0; i < 1000; ++i) {
    const double s = 0.02 + 0.96 * rng.uniform();
    const auto sv = sched.eval(s);
    const Vec x{2.0 * rng.normal(), 2.0 * rng.normal()};
    const Vec m = posterior_mean(g, x, sched, s);
    const Vec sc = score(g, x, sched, s);
    for (std::size_t k = 0; k < 2; ++k) {
      const double via_score = x[k] / sv.alpha + sv.sigma * sv.sigma / sv.alpha * sc[k];
      EXPECT_LE(std::abs(via_score - m[k]), 1e-10 * std::max(1.0, std::abs(m[k])));
    }
  }
}

TEST(Oracle, ReconstructionClosesTheLoop) {
  const auto g = three_component();
  const auto sched = Schedule::vp_cosine();
  CounterRng rng(23);
  for (Parameterization p : kAllParameterizations) {
    OracleDenoiser den(g, sched, p);
    for (int i = 0; i < 100; ++i) {
      const double s = 0.05 + 0.9 * rng.uniform();
      const Vec x{rng.normal(), rng.normal()};
      const Vec psi = den.evaluate(x, s, 1);
      const Vec x0 = reconstruct_x0(p, x, psi, sched, s);
      const Vec m = posterior_mean(g, x, sched, s);
      for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(x0[k], m[k], 1e-10) << to_string(p);
    }
  }
}

TEST(Oracle, EvaluateByParameterization) {
  const auto sched = Schedule::vp_cosine();
  const double s = 0.45;
  const auto sv = sched.eval(s);
  const Vec x{0.8};
  OracleDenoiser x0_den(std_normal_1d(), sched, Parameterization::x0);
  EXPECT_EQ(x0_den.evaluate(x, s, 3)[0], posterior_mean(std_normal_1d(), x, sched, s)[0]);
  OracleDenoiser eps_den(std_normal_1d(), sched, Parameterization::epsilon);
  EXPECT_NEAR(eps_den.evaluate(x, s, 3)[0], sv.sigma * x[0], 1e-12);
}

TEST(Oracle, NoisyWithZeroNoiseIsBitIdentical) {
  const auto g = three_component();
  const auto sched = Schedule::vp_linear();
  OracleDenoiser clean(g, sched, Parameterization::v);
  NoisyOracleDenoiser noisy(g, sched, Parameterization::v, 0.0, CounterRng(1));
  const Vec x{0.2, -0.4};
  EXPECT_EQ(clean.evaluate(x, 0.3, 5), noisy.evaluate(x, 0.3, 5));
}

TEST(Oracle, NoisyVarianceMatches) {
  const auto sched = Schedule::vp_cosine();
  const double noise = 0.3;
  NoisyOracleDenoiser den(std_normal_1d(), sched, Parameterization::epsilon, noise, CounterRng(99));
  const Vec x{0.5};
  const int n = 100000;
  double mean = 0.0, m2 = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double v = den.evaluate(x, 0.5, 10)[0];
    const double d = v - mean;
    mean += d / i;
    m2 += d * (v - mean);
  }
  EXPECT_NEAR(m2 / (n - 1) / (noise * noise), 1.0, 0.03);
  EXPECT_EQ(den.call_count(), static_cast<std::uint64_t>(n));
}

TEST(Oracle, FarTailsStayFinite) {
  const auto g = three_component();
  const auto sched = Schedule::vp_cosine();
  const Vec far{400.0, -900.0};
  for (double s : {0.0, 0.01, 0.5, 1.0}) {
    const auto post = posterior(g, far, sched.eval(s));
    for (double v : post.x0) EXPECT_TRUE(std::isfinite(v)) << s;
    for (double v : post.eps) EXPECT_TRUE(std::isfinite(v)) << s;
  }
}

TEST(Oracle, Errors) {
  const auto sched = Schedule::rectified_flow();
  EXPECT_ZEUS_ERROR((void)posterior_mean(std_normal_1d(), Vec{std::nan("")}, sched, 0.5), ErrorCode::invalid_state);
  EXPECT_ZEUS_ERROR((void)score(std_normal_1d(), Vec{1.0}, sched, 0.0), ErrorCode::singular_score);
  EXPECT_ZEUS_ERROR((void)posterior_mean(std_normal_1d(), Vec{1.0, 2.0}, sched, 0.5), ErrorCode::shape_error);
  EXPECT_ZEUS_ERROR(GaussianMixture({0.5, 0.4}, {{0.0}, {1.0}}, {1.0, 1.0}), ErrorCode::invalid_mixture);
  EXPECT_ZEUS_ERROR(GaussianMixture({1.0}, {{0.0}}, {0.0}), ErrorCode::invalid_mixture);
  EXPECT_ZEUS_ERROR(GaussianMixture({0.5, 0.5}, {{0.0}, {1.0, 2.0}}, {1.0, 1.0}), ErrorCode::invalid_mixture);
  EXPECT_ZEUS_ERROR(NoisyOracleDenoiser(std_normal_1d(), sched, Parameterization::x0, -1.0, CounterRng(0)),
                    ErrorCode::invalid_argument);
}

TEST(Oracle, TargetDoesNotCount) {
  OracleDenoiser den(std_normal_1d(), Schedule::vp_cosine(), Parameterization::x0);
  (void)den.target(Vec{1.0}, 0.5, Parameterization::v);
  EXPECT_EQ(den.call_count(), 0u);
  (void)den.evaluate(Vec{1.0}, 0.5, 1);
  EXPECT_EQ(den.call_count(), 1u);
}

TEST(RecordedDenoiser, ReplaysExactlyTRecords) {
  const std::uint32_t steps = 50;
  const std::uint64_t dim = 16384;
  RecordedDenoiser den(synthetic_trace(steps, dim), Parameterization::epsilon);
  const Vec x(dim, 0.0);
  for (std::uint32_t i = 0; i < steps; ++i) {
    const Vec psi = den.evaluate(x, 0.0, static_cast<int>(steps - i));
    ASSERT_EQ(psi.size(), dim);
    EXPECT_EQ(psi[dim - 1], static_cast<double>(static_cast<float>(i) * 0.5f));
  }
  EXPECT_EQ(den.call_count(), steps);
  EXPECT_ZEUS_ERROR((void)den.evaluate(x, 0.0, 0), ErrorCode::trace_desync);
}

TEST(RecordedDenoiser, StepMismatchAndShape) {
  RecordedDenoiser den(synthetic_trace(4, 2), Parameterization::x0);
  EXPECT_ZEUS_ERROR((void)den.evaluate(Vec{0.0, 0.0}, 1.0, 3), ErrorCode::trace_desync);
  EXPECT_ZEUS_ERROR((void)den.evaluate(Vec{0.0}, 1.0, 4), ErrorCode::shape_error);
  EXPECT_EQ(den.mixture(), nullptr);
}

TEST(RecordedDenoiser, SkipAdvancesCursorWithoutCounting) {
  RecordedDenoiser den(synthetic_trace(4, 1), Parameterization::x0);
  (void)den.evaluate(Vec{0.0}, 1.0, 4);
  den.skip(3);
  EXPECT_EQ(den.cursor(), 2u);
  EXPECT_EQ(den.call_count(), 1u);
  EXPECT_EQ(den.evaluate(Vec{0.0}, 0.5, 2)[0], 1.0);
  EXPECT_ZEUS_ERROR(den.skip(2), ErrorCode::trace_desync);
}
