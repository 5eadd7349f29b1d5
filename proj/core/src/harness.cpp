#include "zeus/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "harness_io.hpp"
#include "json.hpp"
#include "zeus/error.hpp"
#include "zeus/metrics.hpp"

namespace zeus {
namespace {

using json = nlohmann::json;

std::string_view denoiser_name(DenoiserKind kind) {
  switch (kind) {
    case DenoiserKind::oracle:
      return "oracle";
    case DenoiserKind::noisy_oracle:
      return "noisy_oracle";
    case DenoiserKind::recorded:
      return "recorded";
  }
  return "?";
}

// Loaded once per run so every denoiser instance replays the same records.
struct SourceData {
  std::optional<Trace> trace;
  std::size_t dim = 0;
};

SourceData load_source(const ExperimentConfig& cfg) {
  SourceData src;
  if (cfg.denoiser.kind == DenoiserKind::recorded) {
    const Trace header = read_trace_header(cfg.denoiser.trace);
    if (header.steps != static_cast<std::uint32_t>(cfg.steps)) {
      throw Error(ErrorCode::trace_desync, "trace " + cfg.denoiser.trace + " has T=" + std::to_string(header.steps) +
                                               " but the config asks for T=" + std::to_string(cfg.steps));
    }
    src.trace = read_trace(cfg.denoiser.trace);
    src.dim = static_cast<std::size_t>(src.trace->dim);
  } else {
    src.dim = cfg.denoiser.gmm->dim();
  }
  return src;
}

std::unique_ptr<Denoiser> make_denoiser(const ExperimentConfig& cfg, const SourceData& src, std::uint64_t seed,
                                        std::string_view purpose) {
  switch (cfg.denoiser.kind) {
    case DenoiserKind::oracle:
      return std::make_unique<OracleDenoiser>(*cfg.denoiser.gmm, cfg.schedule(), cfg.parameterization);
    case DenoiserKind::noisy_oracle:
      return std::make_unique<NoisyOracleDenoiser>(*cfg.denoiser.gmm, cfg.schedule(), cfg.parameterization,
                                                   cfg.denoiser.noise_std,
                                                   CounterRng::for_stream(cfg.experiment, seed, purpose));
    case DenoiserKind::recorded:
      return std::make_unique<RecordedDenoiser>(*src.trace, cfg.parameterization);
  }
  throw Error(ErrorCode::config_error, "unknown denoiser kind");
}

json stat_json(const Stat& s) { return {{"mean", s.mean}, {"std_error", s.std_error}, {"n", s.n}}; }

json config_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["schedule"] = {{"kind", std::string(to_string(cfg.schedule_kind))}, {"params", cfg.schedule_params}};
  j["parameterization"] = std::string(to_string(cfg.parameterization));
  j["solver"] = std::string(to_string(cfg.solver));
  j["T"] = cfg.steps;
  j["plan"] = {{"r", cfg.plan.r}, {"warm_frac", cfg.plan.warm_frac}, {"cool_frac", cfg.plan.cool_frac}};
  j["strategy"] = to_string(cfg.strategy);
  json compare = json::array();
  for (const auto& s : cfg.compare_strategies) compare.push_back(to_string(s));
  j["compare_strategies"] = compare;
  json den = {{"kind", std::string(denoiser_name(cfg.denoiser.kind))}, {"noise_std", cfg.denoiser.noise_std}};
  if (cfg.denoiser.kind == DenoiserKind::recorded) den["trace"] = cfg.denoiser.trace;
  j["denoiser"] = den;
  j["seeds"] = cfg.seeds.size();
  return j;
}

json summary_json(const RunResult& result) {
  json j;
  j["config"] = config_json(result.config);
  j["plan_fresh_calls"] = result.config.step_plan().fresh_count();
  json strategies = json::array();
  for (const auto& s : result.summaries) {
    strategies.push_back({{"strategy", to_string(s.strategy)},
                          {"nfe", s.nfe},
                          {"final_mse", stat_json(s.final_mse)},
                          {"psnr", stat_json(s.psnr)},
                          {"speedup", stat_json(s.speedup)}});
  }
  j["strategies"] = strategies;
  if (!result.win_rate.empty()) j["win_rate"] = result.win_rate;
  return j;
}

const char* kRunColumns = "seed,strategy,r,T,solver,parameterization,nfe,baseline_nfe,speedup,final_mse,psnr";

void write_run_row(CsvWriter& csv, const ExperimentConfig& cfg, const SeedRun& run) {
  csv.field(run.seed)
      .field(to_string(run.strategy))
      .field(static_cast<std::int64_t>(cfg.plan.r))
      .field(static_cast<std::int64_t>(cfg.steps))
      .field(to_string(cfg.solver))
      .field(to_string(cfg.parameterization))
      .field(run.nfe)
      .field(run.baseline_nfe)
      .field(run.speedup)
      .field(run.final_mse)
      .field(run.psnr);
}

}  // namespace

Stat summarize(const std::vector<double>& values) {
  Stat s;
  double sum = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++s.n;
    }
  }
  if (s.n == 0) {
    s.mean = std::nan("");
    s.std_error = std::nan("");
    return s;
  }
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) {
      if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
    }
    s.std_error = std::sqrt(ss / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
  }
  return s;
}

Vec initial_noise(const ExperimentConfig& config, std::uint64_t seed, std::size_t dim) {
  CounterRng rng = CounterRng::for_stream(config.experiment, seed, "initial");
  Vec x(dim);
  for (double& v : x) v = rng.normal();
  return x;
}

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const SourceData src = load_source(config);
  const Schedule sched = config.schedule();
  const TimeGrid grid(config.steps);
  const StepPlan plan = config.step_plan();
  const StepPlan full = StepPlan::all_full(config.steps);

  std::vector<PredictorStrategy> strategies{config.strategy};
  for (const auto& s : config.compare_strategies) {
    if (std::find(strategies.begin(), strategies.end(), s) == strategies.end()) strategies.push_back(s);
  }

  RunResult result;
  result.config = config;
  for (std::uint64_t seed : config.seeds) {
    const Vec x1 = initial_noise(config, seed, src.dim);
    auto base_den = make_denoiser(config, src, seed, "noise/baseline");
    const Trajectory baseline = run_accelerated(*base_den, full, PredictorStrategy::reuse(), config.solver,
                                                config.parameterization, sched, grid, x1);
    const double peak = dynamic_range(baseline.final_state());
    for (const auto& strategy : strategies) {
      auto den = make_denoiser(config, src, seed, "noise/accelerated");
      const Trajectory traj =
          run_accelerated(*den, plan, strategy, config.solver, config.parameterization, sched, grid, x1);
      SeedRun row;
      row.seed = seed;
      row.strategy = strategy;
      row.nfe = traj.nfe;
      row.baseline_nfe = baseline.nfe;
      row.speedup = speedup_proxy(traj, baseline);
      row.final_mse = mse(traj.final_state(), baseline.final_state());
      row.psnr = peak > 0.0 ? psnr(traj.final_state(), baseline.final_state(), peak) : std::nan("");
      row.step_mse = per_step_mse(traj, baseline);
      row.fresh = traj.fresh;
      result.runs.push_back(std::move(row));
    }
  }

  for (std::size_t k = 0; k < strategies.size(); ++k) {
    StrategySummary sum;
    sum.strategy = strategies[k];
    std::vector<double> m, p, sp;
    for (std::size_t i = k; i < result.runs.size(); i += strategies.size()) {
      m.push_back(result.runs[i].final_mse);
      p.push_back(result.runs[i].psnr);
      sp.push_back(result.runs[i].speedup);
      sum.nfe = result.runs[i].nfe;
    }
    sum.final_mse = summarize(m);
    sum.psnr = summarize(p);
    sum.speedup = summarize(sp);
    result.summaries.push_back(sum);
  }
  for (std::size_t k = 1; k < strategies.size(); ++k) {
    std::size_t wins = 0;
    for (std::size_t i = 0; i < result.runs.size(); i += strategies.size()) {
      if (result.runs[i].final_mse <= result.runs[i + k].final_mse) ++wins;
    }
    result.win_rate[to_string(strategies[k])] =
        static_cast<double>(wins) / static_cast<double>(config.seeds.size());
  }
  return result;
}

std::vector<std::filesystem::path> write_run(const RunResult& result, const std::filesystem::path& out) {
  ensure_dir(out);
  const ExperimentConfig& cfg = result.config;

  CsvWriter runs(kRunColumns);
  for (const auto& run : result.runs) {
    write_run_row(runs, cfg, run);
    runs.end_row();
  }
  CsvWriter steps("seed,strategy,step,t,fresh,mse");
  for (const auto& run : result.runs) {
    for (std::size_t i = 0; i < run.step_mse.size(); ++i) {
      steps.field(run.seed)
          .field(to_string(run.strategy))
          .field(static_cast<std::uint64_t>(i))
          .field(static_cast<std::int64_t>(cfg.steps) - static_cast<std::int64_t>(i))
          .field(static_cast<std::int64_t>(run.fresh[i] ? 1 : 0))
          .field(run.step_mse[i]);
      steps.end_row();
    }
  }
  return {write_text(out / "runs.csv", runs.str()), write_text(out / "per_step_mse.csv", steps.str()),
          write_text(out / "summary.json", summary_json(result).dump(2) + "\n")};
}

ExperimentConfig apply_axis(const ExperimentConfig& config, std::string_view axis, std::string_view value) {
  ExperimentConfig cfg = config;
  const std::string v(value);
  auto as_int = [&](const char* name) {
    try {
      std::size_t used = 0;
      const long long n = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return n;
    } catch (const std::exception&) {
      throw Error(ErrorCode::config_error, std::string("axis ") + name + ": expected an integer, got '" + v + "'");
    }
  };
  auto as_real = [&](const char* name) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw Error(ErrorCode::config_error, std::string("axis ") + name + ": expected a number, got '" + v + "'");
    }
  };
  auto rethrow_as_config = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::config_error) throw;
      throw Error(ErrorCode::config_error, "axis " + std::string(axis) + "=" + v + ": " + e.detail());
    }
  };

  if (axis == "r") {
    cfg.plan.r = static_cast<int>(as_int("r"));
  } else if (axis == "strategy") {
    rethrow_as_config([&] { cfg.strategy = parse_strategy(v); });
  } else if (axis == "lagrange-order") {
    rethrow_as_config([&] { cfg.strategy = PredictorStrategy::lagrange(static_cast<int>(as_int("lagrange-order"))); });
  } else if (axis == "solver") {
    rethrow_as_config([&] { cfg.solver = parse_solver_kind(v); });
  } else if (axis == "parameterization") {
    rethrow_as_config([&] { cfg.parameterization = parse_parameterization(v); });
  } else if (axis == "T") {
    cfg.steps = static_cast<int>(as_int("T"));
  } else if (axis == "noise_std") {
    cfg.denoiser.noise_std = as_real("noise_std");
    if (cfg.denoiser.kind == DenoiserKind::oracle && cfg.denoiser.noise_std != 0.0) {
      cfg.denoiser.kind = DenoiserKind::noisy_oracle;
    }
  } else if (axis == "warm_frac") {
    cfg.plan.warm_frac = as_real("warm_frac");
  } else if (axis == "cool_frac") {
    cfg.plan.cool_frac = as_real("cool_frac");
  } else {
    throw Error(ErrorCode::unknown_axis,
                "'" + std::string(axis) +
                    "' (expected r, strategy, lagrange-order, solver, parameterization, T, noise_std, warm_frac "
                    "or cool_frac)");
  }
  cfg.validate();
  return cfg;
}

std::vector<SweepCell> sweep(const ExperimentConfig& config, std::string_view axis,
                             const std::vector<std::string>& values) {
  if (values.empty()) throw Error(ErrorCode::config_error, "sweep needs at least one value");
  // Resolve every cell first so a bad value fails before any compute.
  std::vector<ExperimentConfig> cells;
  for (const auto& v : values) cells.push_back(apply_axis(config, axis, v));
  std::vector<SweepCell> out;
  for (std::size_t i = 0; i < cells.size(); ++i) out.push_back({values[i], run_experiment(cells[i])});
  return out;
}

std::vector<std::filesystem::path> write_sweep(const std::vector<SweepCell>& cells, std::string_view axis,
                                               const std::filesystem::path& out) {
  ensure_dir(out);
  CsvWriter csv(std::string("axis,value,") + kRunColumns);
  json summary;
  summary["axis"] = std::string(axis);
  json arr = json::array();
  for (const auto& cell : cells) {
    for (const auto& run : cell.result.runs) {
      csv.field(axis).field(cell.value);
      write_run_row(csv, cell.result.config, run);
      csv.end_row();
    }
    json j = summary_json(cell.result);
    j["value"] = cell.value;
    arr.push_back(j);
  }
  summary["cells"] = arr;
  return {write_text(out / "sweep.csv", csv.str()), write_text(out / "sweep_summary.json", summary.dump(2) + "\n")};
}

ReplayResult replay(const std::filesystem::path& trace_path, const ExperimentConfig& config,
                    const std::filesystem::path& out) {
  ExperimentConfig cfg = config;
  cfg.denoiser = DenoiserSpec{};
  cfg.denoiser.kind = DenoiserKind::recorded;
  cfg.denoiser.trace = trace_path.string();
  if (const auto side = trace_sidecar_parameterization(trace_path)) {
    if (*side != cfg.parameterization) {
      throw Error(ErrorCode::config_error, "parameterization '" + std::string(to_string(cfg.parameterization)) +
                                               "' disagrees with the trace sidecar ('" +
                                               std::string(to_string(*side)) + "')");
    }
  }
  cfg.validate();

  const SourceData src = load_source(cfg);  // T check happens here, before any step
  const Schedule sched = cfg.schedule();
  const TimeGrid grid(cfg.steps);
  const StepPlan plan = cfg.step_plan();
  const Vec x1 = initial_noise(cfg, cfg.seeds.front(), src.dim);

  RecordedDenoiser den(*src.trace, cfg.parameterization);
  const Trajectory traj = run_accelerated(den, plan, cfg.strategy, cfg.solver, cfg.parameterization, sched, grid, x1);

  Trace replayed;
  replayed.steps = src.trace->steps;
  replayed.dim = src.trace->dim;
  CsvWriter csv("step,t,s,fresh,psi_l2,recorded_max_abs_diff");
  std::uint64_t mismatched = 0;
  for (std::size_t i = 0; i < traj.steps(); ++i) {
    const TraceRecord& rec = src.trace->records[i];
    TraceRecord r;
    r.step = rec.step;
    r.s = rec.s;
    r.psi.resize(traj.psis[i].size());
    double l2 = 0.0, diff = 0.0;
    for (std::size_t k = 0; k < r.psi.size(); ++k) {
      r.psi[k] = static_cast<float>(traj.psis[i][k]);
      l2 += traj.psis[i][k] * traj.psis[i][k];
      diff = std::max(diff, std::abs(traj.psis[i][k] - static_cast<double>(rec.psi[k])));
    }
    if (traj.fresh[i] && diff != 0.0) ++mismatched;
    csv.field(static_cast<std::uint64_t>(i))
        .field(static_cast<std::uint64_t>(rec.step))
        .field(rec.s)
        .field(static_cast<std::int64_t>(traj.fresh[i] ? 1 : 0))
        .field(std::sqrt(l2))
        .field(diff);
    csv.end_row();
    replayed.records.push_back(std::move(r));
  }
  if (mismatched != 0) {
    throw Error(ErrorCode::invalid_state, std::to_string(mismatched) + " fresh steps differ from the trace");
  }

  ensure_dir(out);
  ReplayResult res;
  res.nfe = traj.nfe;
  res.steps = traj.steps();
  const auto trace_out = out / "replayed.ztrc";
  write_trace(trace_out.string(), replayed);
  json summary = {{"trace", trace_path.string()},
                  {"T", cfg.steps},
                  {"dim", src.dim},
                  {"parameterization", std::string(to_string(cfg.parameterization))},
                  {"strategy", to_string(cfg.strategy)},
                  {"r", cfg.plan.r},
                  {"nfe", traj.nfe}};
  res.files = {trace_out, write_text(out / "replay.csv", csv.str()),
               write_text(out / "replay_summary.json", summary.dump(2) + "\n")};
  return res;
}

}  // namespace zeus
