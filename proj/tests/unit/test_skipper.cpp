#include <algorithm>

#include "test_util.hpp"
#include "zeus/rng.hpp"
#include "zeus/skipper.hpp"

using namespace zeus;

namespace {

int count_full(const StepPlan& plan) {
  return static_cast<int>(std::count_if(plan.labels.begin(), plan.labels.end(), [](const StepLabel& l) { return l.full; }));
}

GaussianMixture gmm3() {
  return GaussianMixture({0.5, 0.3, 0.2}, {{1.5, 0.5}, {-1.0, 1.0}, {0.0, -1.5}}, {0.05, 0.1, 0.08});
}

}  // namespace

TEST(StepPlan, MediumPlanHas27FreshCalls) {
  const auto plan = make_step_plan(50, 2, 0.2, 0.1);
  EXPECT_EQ(plan.warm_steps, 10);
  EXPECT_EQ(plan.cool_steps, 5);
  EXPECT_EQ(plan.fresh_count(), 27);
  EXPECT_EQ(count_full(plan), 27);
  int middle_full = 0;
  for (int i = 10; i < 45; ++i) middle_full += plan.labels[static_cast<std::size_t>(i)].full;
  EXPECT_EQ(middle_full, 12);
}

TEST(StepPlan, FastPlanHas24FreshCalls) { EXPECT_EQ(make_step_plan(50, 3, 0.2, 0.1).fresh_count(), 24); }

TEST(StepPlan, RatioOneAlternates) {
  for (int steps : {50, 51, 7}) {
    const auto plan = make_step_plan(steps, 1, 0.0, 0.0);
    EXPECT_EQ(plan.fresh_count(), (steps + 1) / 2);
    for (int i = 0; i < steps; ++i) {
      EXPECT_EQ(plan.labels[static_cast<std::size_t>(i)], i % 2 == 0 ? StepLabel::Full() : StepLabel::Reduced(1));
    }
  }
}

TEST(StepPlan, PartialTailKeepsItsFull) {
  // Middle of 7 steps with r = 3: [F R1 R2 R3] [F R1 R2].
  const auto plan = make_step_plan(7, 3, 0.0, 0.0);
  const std::vector<StepLabel> expect{StepLabel::Full(),       StepLabel::Reduced(1), StepLabel::Reduced(2),
                                      StepLabel::Reduced(3),   StepLabel::Full(),     StepLabel::Reduced(1),
                                      StepLabel::Reduced(2)};
  EXPECT_EQ(plan.labels, expect);
}

TEST(StepPlan, ZeroRatioIsAllFull) {
  const auto plan = make_step_plan(20, 0, 0.2, 0.1);
  EXPECT_EQ(plan.fresh_count(), 20);
  EXPECT_EQ(plan.labels, StepPlan::all_full(20).labels);
}

TEST(StepPlan, Invariants) {
  for (int steps : {10, 33, 50, 101}) {
    for (int r = 1; r <= 5 && steps >= r + 2; ++r) {
      const auto plan = make_step_plan(steps, r, 0.2, 0.1);
      ASSERT_NO_THROW(validate_plan(plan));
      EXPECT_TRUE(plan.labels.front().full);
      for (int i = 0; i < steps; ++i) {
        const auto& l = plan.labels[static_cast<std::size_t>(i)];
        if (!l.full) {
          EXPECT_LE(l.offset, r);
          EXPECT_TRUE(plan.labels[static_cast<std::size_t>(i - l.offset)].full);
        }
      }
    }
  }
}

TEST(StepPlan, Errors) {
  EXPECT_ZEUS_ERROR((void)make_step_plan(50, 2, 0.6, 0.4), ErrorCode::invalid_plan);
  EXPECT_ZEUS_ERROR((void)make_step_plan(50, 2, -0.1, 0.1), ErrorCode::invalid_plan);
  EXPECT_ZEUS_ERROR((void)make_step_plan(50, 2, 0.2, 1.0), ErrorCode::invalid_plan);
  EXPECT_ZEUS_ERROR((void)make_step_plan(4, 3, 0.0, 0.0), ErrorCode::invalid_plan);
  EXPECT_ZEUS_ERROR((void)make_step_plan(50, -1, 0.2, 0.1), ErrorCode::invalid_plan);
  StepPlan bad = make_step_plan(10, 2, 0.0, 0.0);
  bad.labels[0] = StepLabel::Reduced(1);
  EXPECT_ZEUS_ERROR(validate_plan(bad), ErrorCode::invalid_plan);
  bad = make_step_plan(10, 2, 0.0, 0.0);
  bad.labels[2] = StepLabel::Reduced(1);
  EXPECT_ZEUS_ERROR(validate_plan(bad), ErrorCode::invalid_plan);
}

TEST(StepPlan, PigeonholeOnRandomPlans) {
  CounterRng rng(1234);
  for (int n = 0; n < 1000; ++n) {
    const int r = 2 + static_cast<int>(rng.next_u64() % 5);
    const int steps = r + 2 + static_cast<int>(rng.next_u64() % 200);
    const double warm = 0.4 * rng.uniform(), cool = 0.4 * rng.uniform();
    const auto plan = make_step_plan(steps, r, warm, cool);
    for (int i = 0; i + 1 < steps; ++i) {
      if (plan.in_skip_region(i) && plan.in_skip_region(i + 1)) {
        EXPECT_FALSE(plan.labels[static_cast<std::size_t>(i)].full && plan.labels[static_cast<std::size_t>(i + 1)].full)
            << "T=" << steps << " r=" << r << " i=" << i;
      }
    }
  }
}

TEST(Strategy, NamesRoundTrip) {
  for (const auto& s : {PredictorStrategy::zeus(), PredictorStrategy::reuse(), PredictorStrategy::chain(),
                        PredictorStrategy::lagrange(1), PredictorStrategy::lagrange(6)}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_ZEUS_ERROR((void)parse_strategy("lagrange:7"), ErrorCode::invalid_argument);
  EXPECT_ZEUS_ERROR((void)parse_strategy("lagrange:0"), ErrorCode::invalid_argument);
  EXPECT_ZEUS_ERROR((void)parse_strategy("taylor"), ErrorCode::invalid_argument);
}

TEST(Observe, Examples) {
  EXPECT_EQ(observe(Vec{2.0}, Vec{2.0}, 3).delta, Vec{0.0});
  const auto info = observe(Vec{3.0, 1.0}, Vec{1.0, 1.0}, 7);
  EXPECT_EQ(info.delta, (Vec{2.0, 0.0}));
  EXPECT_EQ(info.anchor_t, 7);
  EXPECT_EQ(observe_first(Vec{4.0, 5.0}, 9).delta, (Vec{0.0, 0.0}));
  EXPECT_ZEUS_ERROR((void)observe(Vec{1.0}, Vec{1.0, 2.0}, 1), ErrorCode::shape_error);
}

TEST(Predict, Examples) {
  const ObservedInfoSet info{{1.0}, {0.5}, 10};
  EXPECT_EQ(predict(PredictorStrategy::zeus(), info, 1), Vec{1.5});
  EXPECT_EQ(predict(PredictorStrategy::zeus(), info, 2), Vec{1.0});
  EXPECT_EQ(predict(PredictorStrategy::zeus(), info, 3), Vec{1.5});
  EXPECT_EQ(predict(PredictorStrategy::chain(), info, 3), Vec{2.5});
  EXPECT_EQ(predict(PredictorStrategy::reuse(), info, 3), Vec{1.0});
}

TEST(Predict, SingleStepCasesCoincide) {
  const Vec now{0.8, -0.2}, before{0.5, 0.1};
  const auto info = observe(now, before, 5);
  const std::vector<FreshSample> hist{{5, now}, {6, before}};
  const Vec a = predict(PredictorStrategy::lagrange(1), info, 1, hist);
  const Vec b = predict(PredictorStrategy::chain(), info, 1);
  const Vec c = predict(PredictorStrategy::zeus(), info, 1);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_DOUBLE_EQ(a[k], 2 * now[k] - before[k]);
    EXPECT_EQ(b[k], c[k]);
    EXPECT_DOUBLE_EQ(a[k], b[k]);
  }
}

TEST(Predict, InterleaveEquivalences) {
  CounterRng rng(8);
  for (int n = 0; n < 100; ++n) {
    const ObservedInfoSet info{{rng.normal(), rng.normal()}, {rng.normal(), rng.normal()}, 3};
    EXPECT_EQ(predict(PredictorStrategy::zeus(), info, 1), predict(PredictorStrategy::chain(), info, 1));
    for (int j : {2, 4, 6}) EXPECT_EQ(predict(PredictorStrategy::zeus(), info, j), predict(PredictorStrategy::reuse(), info, j));
  }
}

TEST(Predict, LagrangeUsesGridNodes) {
  // Quadratic in t sampled at fresh steps 3 apart is reproduced exactly.
  auto f = [](double t) { return 0.5 * t * t - 2.0 * t + 1.0; };
  const std::vector<FreshSample> hist{{10, {f(10)}}, {13, {f(13)}}, {16, {f(16)}}};
  const ObservedInfoSet info{{f(10)}, {0.0}, 10};
  for (int j = 1; j <= 2; ++j) EXPECT_NEAR(predict(PredictorStrategy::lagrange(2), info, j, hist)[0], f(10 - j), 1e-12);
  EXPECT_ZEUS_ERROR((void)predict(PredictorStrategy::lagrange(3), info, 1, hist), ErrorCode::history_underflow);
  EXPECT_ZEUS_ERROR((void)predict(PredictorStrategy::zeus(), info, 0), ErrorCode::invalid_argument);
}

TEST(Predictor, CommitsPredictionsIntoTheNextDelta) {
  Predictor p(PredictorStrategy::zeus());
  p.fresh(Vec{1.0}, 10);
  EXPECT_EQ(p.info()->delta, Vec{0.0});
  EXPECT_EQ(p.reduced(1), Vec{1.0});
  p.fresh(Vec{1.5}, 8);
  // delta is taken against the value committed at step 9.
  EXPECT_EQ(p.info()->delta, Vec{0.5});
  EXPECT_EQ(p.reduced(1), Vec{2.0});
  EXPECT_EQ(p.reduced(2), Vec{1.5});
  p.fresh(Vec{1.0}, 5);
  EXPECT_EQ(p.info()->delta, Vec{-0.5});
  EXPECT_EQ(p.retained_vectors(), 2u);
}

TEST(Predictor, ReducedBeforeFreshThrows) {
  Predictor p(PredictorStrategy::reuse());
  EXPECT_ZEUS_ERROR((void)p.reduced(1), ErrorCode::invalid_state);
}

TEST(RunAccelerated, ConstantStateForTheInterleavedPredictor) {
  const auto sched = Schedule::vp_cosine();
  for (int steps : {50, 500}) {
    for (int r = 1; r <= 4; ++r) {
      OracleDenoiser den(gmm3(), sched, Parameterization::epsilon);
      std::size_t lo = 99, hi = 0;
      run_accelerated(den, make_step_plan(steps, r, 0.2, 0.1), PredictorStrategy::zeus(), SolverKind::euler,
                      Parameterization::epsilon, sched, TimeGrid(steps), Vec{0.1, 0.2},
                      [&](int, const Predictor& p) {
                        lo = std::min(lo, p.retained_vectors());
                        hi = std::max(hi, p.retained_vectors());
                      });
      EXPECT_EQ(lo, 2u);
      EXPECT_EQ(hi, 2u);
    }
  }
}

TEST(RunAccelerated, CallCounterEqualsFullLabels) {
  const auto sched = Schedule::vp_linear();
  for (int r = 0; r <= 4; ++r) {
    OracleDenoiser den(gmm3(), sched, Parameterization::v);
    const auto plan = make_step_plan(40, r, 0.2, 0.1);
    const auto traj = run_accelerated(den, plan, PredictorStrategy::chain(), SolverKind::dpmpp2m,
                                      Parameterization::v, sched, TimeGrid(40), Vec{0.0, 0.5});
    EXPECT_EQ(den.call_count(), static_cast<std::uint64_t>(count_full(plan)));
    EXPECT_EQ(traj.nfe, den.call_count());
    EXPECT_EQ(traj.steps(), 40u);
  }
}

TEST(RunAccelerated, AllFullMatchesDirectSolver) {
  const auto sched = Schedule::vp_cosine();
  const TimeGrid grid(25);
  OracleDenoiser den(gmm3(), sched, Parameterization::x0);
  OracleDenoiser direct(gmm3(), sched, Parameterization::x0);
  const auto traj = run_accelerated(den, StepPlan::all_full(25), PredictorStrategy::zeus(), SolverKind::dpmpp2m,
                                    Parameterization::x0, sched, grid, Vec{-0.3, 0.7});
  SolverState st = initial_state({-0.3, 0.7}, grid);
  for (int i = 0; i < 25; ++i) {
    const Vec psi = direct.evaluate(st.x, grid.s(st.t), st.t);
    st = dpmpp2m_step(st, psi, Parameterization::x0, sched, grid);
    EXPECT_EQ(traj.states[static_cast<std::size_t>(i)], st.x);
  }
}

TEST(RunAccelerated, Deterministic) {
  const auto sched = Schedule::vp_cosine();
  for (const auto& s : {PredictorStrategy::zeus(), PredictorStrategy::lagrange(3)}) {
    OracleDenoiser a(gmm3(), sched, Parameterization::epsilon), b(gmm3(), sched, Parameterization::epsilon);
    const auto plan = make_step_plan(50, 2, 0.2, 0.1);
    const auto ta = run_accelerated(a, plan, s, SolverKind::euler, Parameterization::epsilon, sched, TimeGrid(50), Vec{1.0, -1.0});
    const auto tb = run_accelerated(b, plan, s, SolverKind::euler, Parameterization::epsilon, sched, TimeGrid(50), Vec{1.0, -1.0});
    EXPECT_EQ(ta.states, tb.states);
    EXPECT_EQ(ta.psis, tb.psis);
  }
}

TEST(RunAccelerated, LagrangeRampsUpWithoutWarmup) {
  const auto sched = Schedule::vp_cosine();
  OracleDenoiser den(gmm3(), sched, Parameterization::epsilon);
  const auto plan = make_step_plan(30, 2, 0.0, 0.0);
  EXPECT_NO_THROW(run_accelerated(den, plan, PredictorStrategy::lagrange(4), SolverKind::euler,
                                  Parameterization::epsilon, sched, TimeGrid(30), Vec{0.2, 0.2}));
}

TEST(RunAccelerated, PlanLengthMustMatchGrid) {
  const auto sched = Schedule::vp_cosine();
  OracleDenoiser den(gmm3(), sched, Parameterization::epsilon);
  EXPECT_ZEUS_ERROR(run_accelerated(den, StepPlan::all_full(10), PredictorStrategy::zeus(), SolverKind::euler,
                                    Parameterization::epsilon, sched, TimeGrid(12), Vec{0.0, 0.0}),
                    ErrorCode::invalid_plan);
}
