#include <cstdlib>
#include <sstream>

#include "test_util.hpp"
#include "zeus/harness.hpp"
#include "zeus/metrics.hpp"
#include "zeus/trace.hpp"

using namespace zeus;
using zeus::testing::scratch_dir;
using zeus::testing::slurp;

namespace {

const char* kSmall = R"({
  "experiment": "small",
  "schedule": "vp_cosine",
  "parameterization": "epsilon",
  "solver": "euler",
  "T": 20,
  "plan": {"r": 2},
  "strategy": "zeus",
  "compare_strategies": ["reuse"],
  "denoiser": {"kind": "oracle", "gmm": {"weights": [0.6, 0.4], "means": [[1.0, 0.0], [-1.0, 0.5]], "variances": [0.1, 0.05]}},
  "seeds": {"count": 3, "start": 7}
})";

std::string config_error_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_error);
    return e.what();
  }
  ADD_FAILURE() << "expected config_error";
  return {};
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return s.replace(pos, from.size(), to);
}

int run_cli(const std::string& args) {
#ifdef ZEUS_CLI_PATH
  const std::string cmd = std::string("\"") + ZEUS_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#else
  (void)args;
  GTEST_SKIP() << "CLI not built";
  return -1;
#endif
}

}  // namespace

TEST(Config, ParsesAndFillsDefaults) {
  const auto cfg = parse_config(kSmall);
  EXPECT_EQ(cfg.experiment, "small");
  EXPECT_EQ(cfg.steps, 20);
  EXPECT_EQ(cfg.plan.r, 2);
  EXPECT_DOUBLE_EQ(cfg.plan.warm_frac, 0.2);
  EXPECT_DOUBLE_EQ(cfg.plan.cool_frac, 0.1);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{7, 8, 9}));
  EXPECT_EQ(cfg.compare_strategies, std::vector<PredictorStrategy>{PredictorStrategy::reuse()});
  ASSERT_TRUE(cfg.denoiser.gmm.has_value());
  EXPECT_EQ(cfg.denoiser.gmm->components(), 2u);

  const auto bare = parse_config(R"({"denoiser": {"kind": "oracle", "gmm": {"weights": [1], "means": [[0]], "variances": [1]}}})");
  EXPECT_EQ(bare.steps, 50);
  EXPECT_EQ(bare.plan.r, 0);
  EXPECT_EQ(bare.strategy, PredictorStrategy::zeus());
  EXPECT_EQ(bare.seeds, std::vector<std::uint64_t>{0});
}

TEST(Config, SyntaxErrorReportsLine) {
  const std::string msg = config_error_of("{\n  \"T\": 20,\n  \"plan\": {\"r\": }\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, UnknownFieldsAreRejected) {
  EXPECT_NE(config_error_of(replace(kSmall, "\"T\": 20", "\"T\": 20, \"steps\": 4")).find("steps"), std::string::npos);
  EXPECT_NE(config_error_of(replace(kSmall, "{\"r\": 2}", "{\"r\": 2, \"ratio\": 1}")).find("plan.ratio"),
            std::string::npos);
}

TEST(Config, FieldPathsInSemanticErrors) {
  EXPECT_NE(config_error_of(replace(kSmall, "\"strategy\": \"zeus\"", "\"strategy\": \"lagrange:9\"")).find("field 'strategy'"),
            std::string::npos);
  EXPECT_NE(config_error_of(replace(kSmall, "[\"reuse\"]", "[\"reuse\", \"taylor\"]")).find("compare_strategies"),
            std::string::npos);
  EXPECT_NE(config_error_of(replace(kSmall, "\"T\": 20", "\"T\": 1")).find("'T'"), std::string::npos);
  EXPECT_NE(config_error_of(replace(kSmall, "\"solver\": \"euler\"", "\"solver\": \"heun\"")).find("solver"),
            std::string::npos);
  EXPECT_NE(config_error_of(replace(kSmall, "\"variances\": [0.1, 0.05]", "\"variances\": [0.1, -0.05]")).find("denoiser.gmm"),
            std::string::npos);
}

TEST(Config, DenoiserKindRules) {
  config_error_of(replace(kSmall, "\"kind\": \"oracle\"", "\"kind\": \"recorded\""));
  config_error_of(replace(kSmall, "\"kind\": \"oracle\"", "\"kind\": \"recorded\", \"trace\": \"a.ztrc\""));
  config_error_of(replace(kSmall, "\"kind\": \"oracle\"", "\"kind\": \"oracle\", \"noise_std\": 0.1"));
  EXPECT_NO_THROW((void)parse_config(replace(kSmall, "\"kind\": \"oracle\"", "\"kind\": \"noisy_oracle\", \"noise_std\": 0.1")));
  config_error_of(replace(kSmall, "{\"r\": 2}", "{\"r\": 2, \"warm_frac\": 0.7, \"cool_frac\": 0.4}"));
}

TEST(Config, LoadRejectsMissingFile) {
  EXPECT_ZEUS_ERROR((void)load_config("/nonexistent/zeus.json"), ErrorCode::io_error);
}

TEST(Experiment, ZeroRatioReuseReproducesTheBaseline) {
  auto cfg = parse_config(kSmall);
  cfg.plan.r = 0;
  cfg.strategy = PredictorStrategy::reuse();
  cfg.compare_strategies.clear();
  const auto res = run_experiment(cfg);
  ASSERT_EQ(res.runs.size(), 3u);
  for (const auto& run : res.runs) {
    EXPECT_EQ(run.speedup, 1.0);
    EXPECT_EQ(run.final_mse, 0.0);
    EXPECT_EQ(run.nfe, 20u);
  }
}

TEST(Experiment, SeedMajorRunsAndWinRate) {
  const auto res = run_experiment(parse_config(kSmall));
  ASSERT_EQ(res.runs.size(), 6u);
  EXPECT_EQ(res.runs[0].strategy, PredictorStrategy::zeus());
  EXPECT_EQ(res.runs[1].strategy, PredictorStrategy::reuse());
  EXPECT_EQ(res.runs[0].seed, res.runs[1].seed);
  EXPECT_EQ(res.runs[0].nfe, static_cast<std::uint64_t>(make_step_plan(20, 2, 0.2, 0.1).fresh_count()));
  ASSERT_TRUE(res.win_rate.count("reuse"));
  int wins = 0;
  for (std::size_t i = 0; i < res.runs.size(); i += 2) wins += res.runs[i].final_mse <= res.runs[i + 1].final_mse;
  EXPECT_DOUBLE_EQ(res.win_rate.at("reuse"), wins / 3.0);
  EXPECT_EQ(res.summaries.size(), 2u);
}

TEST(Experiment, InitialNoiseDependsOnlyOnSeed) {
  auto cfg = parse_config(kSmall);
  const Vec a = initial_noise(cfg, 7, 2);
  cfg.plan.r = 3;
  cfg.solver = SolverKind::dpmpp2m;
  EXPECT_EQ(initial_noise(cfg, 7, 2), a);
  EXPECT_NE(initial_noise(cfg, 8, 2), a);
}

TEST(Experiment, OutputFilesAreDeterministic) {
  const auto cfg = parse_config(kSmall);
  const auto a = scratch_dir("a"), b = scratch_dir("b");
  write_run(run_experiment(cfg), a);
  write_run(run_experiment(cfg), b);
  for (const char* f : {"runs.csv", "per_step_mse.csv", "summary.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const std::string runs = slurp(a / "runs.csv");
  EXPECT_EQ(runs.substr(0, runs.find('\n')),
            "seed,strategy,r,T,solver,parameterization,nfe,baseline_nfe,speedup,final_mse,psnr");
  const std::string steps = slurp(a / "per_step_mse.csv");
  EXPECT_EQ(steps.substr(0, steps.find('\n')), "seed,strategy,step,t,fresh,mse");
  EXPECT_NE(slurp(a / "summary.json").find("\"win_rate\""), std::string::npos);
}

TEST(Sweep, RatioAxis) {
  const auto cfg = parse_config(kSmall);
  const auto cells = sweep(cfg, "r", {"1", "2", "3"});
  ASSERT_EQ(cells.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(cells[i].result.config.plan.r, static_cast<int>(i) + 1);
  }
  EXPECT_GT(cells[0].result.runs[0].nfe, cells[2].result.runs[0].nfe);
  const auto out = scratch_dir("sweep");
  write_sweep(cells, "r", out);
  const std::string csv = slurp(out / "sweep.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "axis,value,seed,strategy,r,T,solver,parameterization,nfe,baseline_nfe,speedup,final_mse,psnr");
}

TEST(Sweep, AxisErrors) {
  const auto cfg = parse_config(kSmall);
  EXPECT_ZEUS_ERROR((void)apply_axis(cfg, "temperature", "1"), ErrorCode::unknown_axis);
  EXPECT_ZEUS_ERROR((void)apply_axis(cfg, "r", "two"), ErrorCode::config_error);
  EXPECT_ZEUS_ERROR((void)sweep(cfg, "r", {"1", "-4"}), ErrorCode::config_error);
  EXPECT_EQ(apply_axis(cfg, "lagrange-order", "3").strategy, PredictorStrategy::lagrange(3));
  const auto noisy = apply_axis(cfg, "noise_std", "0.05");
  EXPECT_EQ(noisy.denoiser.kind, DenoiserKind::noisy_oracle);
  EXPECT_EQ(noisy.denoiser.noise_std, 0.05);
}

namespace {

// Records an all-full oracle run as a trace with a sidecar.
std::filesystem::path record_trace(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const Schedule sched = cfg.schedule();
  const TimeGrid grid(cfg.steps);
  OracleDenoiser den(*cfg.denoiser.gmm, sched, cfg.parameterization);
  const auto traj = run_accelerated(den, StepPlan::all_full(cfg.steps), PredictorStrategy::reuse(), cfg.solver,
                                    cfg.parameterization, sched, grid, initial_noise(cfg, cfg.seeds.front(), 2));
  Trace tr;
  tr.steps = static_cast<std::uint32_t>(cfg.steps);
  tr.dim = 2;
  for (std::size_t i = 0; i < traj.steps(); ++i) {
    TraceRecord rec;
    rec.step = static_cast<std::uint32_t>(cfg.steps - static_cast<int>(i));
    rec.s = grid.s(cfg.steps - static_cast<int>(i));
    for (double v : traj.psis[i]) rec.psi.push_back(static_cast<float>(v));
    tr.records.push_back(rec);
  }
  const auto path = dir / "capture.ztrc";
  write_trace(path.string(), tr);
  std::ofstream(path.string() + ".json") << "{\"parameterization\": \"" << to_string(cfg.parameterization) << "\"}\n";
  return path;
}

}  // namespace

TEST(Replay, AllFullRoundTripIsByteIdentical) {
  auto cfg = parse_config(kSmall);
  cfg.steps = 10;
  cfg.plan.r = 0;
  const auto dir = scratch_dir("replay");
  const auto trace = record_trace(cfg, dir);
  const auto res = replay(trace, cfg, dir / "out");
  EXPECT_EQ(res.nfe, 10u);
  EXPECT_EQ(read_trace((dir / "out" / "replayed.ztrc").string()), read_trace(trace.string()));
  EXPECT_EQ(slurp(dir / "out" / "replayed.ztrc"), slurp(trace));
  const std::string csv = slurp(dir / "out" / "replay.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,t,s,fresh,psi_l2,recorded_max_abs_diff");
}

TEST(Replay, MismatchedLengthIsRejectedBeforeRunning) {
  auto cfg = parse_config(kSmall);
  cfg.steps = 10;
  const auto dir = scratch_dir("desync");
  const auto trace = record_trace(cfg, dir);
  cfg.steps = 12;
  EXPECT_ZEUS_ERROR((void)replay(trace, cfg, dir / "out"), ErrorCode::trace_desync);
  EXPECT_FALSE(std::filesystem::exists(dir / "out"));

  auto run_cfg = cfg;
  run_cfg.denoiser = DenoiserSpec{};
  run_cfg.denoiser.kind = DenoiserKind::recorded;
  run_cfg.denoiser.trace = trace.string();
  EXPECT_ZEUS_ERROR((void)run_experiment(run_cfg), ErrorCode::trace_desync);
}

TEST(Replay, SidecarMustAgree) {
  auto cfg = parse_config(kSmall);
  cfg.steps = 10;
  const auto dir = scratch_dir("sidecar");
  const auto trace = record_trace(cfg, dir);
  EXPECT_EQ(trace_sidecar_parameterization(trace), Parameterization::epsilon);
  cfg.parameterization = Parameterization::x0;
  EXPECT_ZEUS_ERROR((void)replay(trace, cfg, dir / "out"), ErrorCode::config_error);
}

TEST(Verify, BlueSuiteWritesReport) {
  const auto out = scratch_dir("verify");
  const auto res = verify(VerifySuite::blue, out);
  EXPECT_TRUE(res.passed);
  ASSERT_EQ(res.suites.size(), 1u);
  EXPECT_TRUE(std::filesystem::exists(out / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(out / "blue.csv"));
  EXPECT_NE(slurp(out / "report.json").find("\"passed\": true"), std::string::npos);
  EXPECT_ZEUS_ERROR((void)parse_verify_suite("everything"), ErrorCode::config_error);
  EXPECT_EQ(parse_verify_suite("bias_variance"), VerifySuite::bias_variance);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("cli");
  {
    std::ofstream(dir / "ok.json") << replace(kSmall, "\"count\": 3", "\"count\": 1");
    std::ofstream(dir / "bad.json") << replace(kSmall, "\"T\": 20", "\"T\": \"many\"");
  }
  const std::string out = " --out \"" + (dir / "out").string() + "\"";
  EXPECT_EQ(run_cli("run --config \"" + (dir / "ok.json").string() + "\"" + out), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "runs.csv"));
  EXPECT_EQ(run_cli("run --config \"" + (dir / "bad.json").string() + "\"" + out), 2);
  EXPECT_EQ(run_cli("run --config \"" + (dir / "missing.json").string() + "\"" + out), 2);
  EXPECT_EQ(run_cli("sweep --config \"" + (dir / "ok.json").string() + "\" --axis temperature --values 1" + out), 2);
  EXPECT_EQ(run_cli("sweep --config \"" + (dir / "ok.json").string() + "\" --axis r --values 1,2" + out), 0);
  EXPECT_EQ(run_cli("verify --suite lebesgue" + out), 1);
  EXPECT_EQ(run_cli("verify --suite minimax" + out), 0);
  EXPECT_EQ(run_cli("frobnicate"), 2);
}
