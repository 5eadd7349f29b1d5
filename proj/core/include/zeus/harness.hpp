#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zeus/oracle.hpp"
#include "zeus/parameterization.hpp"
#include "zeus/schedule.hpp"
#include "zeus/skipper.hpp"
#include "zeus/solver.hpp"

namespace zeus {

struct DenoiserSpec {
  DenoiserKind kind = DenoiserKind::oracle;
  std::optional<GaussianMixture> gmm;
  double noise_std = 0.0;
  std::string trace;  ///< recorded kind only
};

struct PlanSpec {
  int r = 0;
  double warm_frac = 0.2;
  double cool_frac = 0.1;
};

struct ExperimentConfig {
  std::string experiment = "zeus";
  ScheduleKind schedule_kind = ScheduleKind::vp_cosine;
  std::map<std::string, double> schedule_params;
  Parameterization parameterization = Parameterization::epsilon;
  SolverKind solver = SolverKind::euler;
  int steps = 50;
  PlanSpec plan;
  PredictorStrategy strategy = PredictorStrategy::zeus();
  /// Extra strategies run on the same seeds; the summary reports the primary
  /// strategy's win rate against each.
  std::vector<PredictorStrategy> compare_strategies;
  DenoiserSpec denoiser;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir;

  Schedule schedule() const;
  StepPlan step_plan() const;
  /// Checks cross-field rules; throws config_error.
  void validate() const;
};

/// Parses a JSON config. Syntax errors carry line:column, semantic errors the
/// offending field path. Both throw config_error. Relative trace paths are
/// resolved against `base_dir` when it is non-empty.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parameterization stored next to a trace as <trace>.json, if present.
std::optional<Parameterization> trace_sidecar_parameterization(const std::filesystem::path& trace_path);

struct SeedRun {
  std::uint64_t seed = 0;
  PredictorStrategy strategy;
  std::uint64_t nfe = 0;
  std::uint64_t baseline_nfe = 0;
  double speedup = 0.0;
  double final_mse = 0.0;
  double psnr = 0.0;
  std::vector<double> step_mse;
  std::vector<bool> fresh;
};

struct Stat {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Mean and standard error over the finite entries.
Stat summarize(const std::vector<double>& values);

struct StrategySummary {
  PredictorStrategy strategy;
  Stat final_mse;
  Stat psnr;
  Stat speedup;
  std::uint64_t nfe = 0;
};

struct RunResult {
  ExperimentConfig config;
  std::vector<SeedRun> runs;  ///< seed-major, primary strategy first
  std::vector<StrategySummary> summaries;
  /// Fraction of seeds with primary MSE <= the other strategy's, by name.
  std::map<std::string, double> win_rate;
};

/// Runs the all-full baseline and every configured strategy from the same
/// initial noise per seed. Pure computation, no files.
RunResult run_experiment(const ExperimentConfig& config);

/// Initial state x_1 for a seed; shared by baseline and accelerated runs.
Vec initial_noise(const ExperimentConfig& config, std::uint64_t seed, std::size_t dim);

/// Writes runs.csv, per_step_mse.csv and summary.json into `out`.
std::vector<std::filesystem::path> write_run(const RunResult& result, const std::filesystem::path& out);

/// Applies one sweep value to a copy of the config. Axes: r, strategy,
/// solver, parameterization, lagrange-order, T, noise_std, warm_frac,
/// cool_frac. Throws unknown_axis or config_error.
ExperimentConfig apply_axis(const ExperimentConfig& config, std::string_view axis, std::string_view value);

struct SweepCell {
  std::string value;
  RunResult result;
};

std::vector<SweepCell> sweep(const ExperimentConfig& config, std::string_view axis,
                             const std::vector<std::string>& values);
/// Writes sweep.csv and sweep_summary.json.
std::vector<std::filesystem::path> write_sweep(const std::vector<SweepCell>& cells, std::string_view axis,
                                               const std::filesystem::path& out);

/// Three-component 2-D mixture used by the end-to-end checks.
GaussianMixture reference_mixture();

enum class VerifySuite { blue, lagrange, bias_variance, minimax, lebesgue, trend, convergence, all };

std::string to_string(VerifySuite suite);
VerifySuite parse_verify_suite(std::string_view name);

struct SuiteOutcome {
  VerifySuite suite = VerifySuite::blue;
  bool passed = false;
};

struct VerifyResult {
  bool passed = false;
  std::vector<SuiteOutcome> suites;
  std::vector<std::filesystem::path> files;
};

/// Runs the selected analysis suites and writes report.json plus one CSV per
/// table into `out`.
VerifyResult verify(VerifySuite suite, const std::filesystem::path& out, std::uint64_t seed = 0);

struct ReplayResult {
  std::uint64_t nfe = 0;
  std::size_t steps = 0;
  std::vector<std::filesystem::path> files;
};

/// Replays a recorded trace through the configured plan and strategy. Writes
/// replayed.ztrc (the psi consumed at every step), replay.csv and
/// replay_summary.json. A trace whose T differs from the config is rejected
/// with trace_desync before any step runs.
ReplayResult replay(const std::filesystem::path& trace_path, const ExperimentConfig& config,
                    const std::filesystem::path& out);

}  // namespace zeus
