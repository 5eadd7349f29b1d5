#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "zeus/error.hpp"
#include "zeus/harness.hpp"

namespace zeus {
namespace {

using json = nlohmann::json;

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::config_error, "field '" + path + "': " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.contains(key)) field_error(join(path, key), "unknown field");
  }
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) field_error(path.empty() ? "<root>" : path, "expected an object");
  return j;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) field_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) field_error(path, "expected a finite number");
  return v;
}

long long as_integer(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && std::floor(v) == v && std::abs(v) < 9e15) return static_cast<long long>(v);
  }
  field_error(path, "expected an integer");
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) field_error(path, "expected a string");
  return j.get<std::string>();
}

// Runs a parser on a string field and rewrites its error as a field diagnostic.
template <class F>
auto parse_field(const json& j, const std::string& path, F&& parse) {
  const std::string text = as_string(j, path);
  try {
    return parse(text);
  } catch (const Error& e) {
    field_error(path, e.detail());
  }
}

Vec as_vec(const json& j, const std::string& path) {
  if (!j.is_array()) field_error(path, "expected an array of numbers");
  Vec out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

GaussianMixture parse_gmm(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"weights", "means", "variances"});
  for (const char* key : {"weights", "means", "variances"}) {
    if (!j.contains(key)) field_error(join(path, key), "missing");
  }
  Vec weights = as_vec(j["weights"], join(path, "weights"));
  const json& jm = j["means"];
  if (!jm.is_array()) field_error(join(path, "means"), "expected an array of vectors");
  std::vector<Vec> means;
  for (std::size_t i = 0; i < jm.size(); ++i) {
    means.push_back(as_vec(jm[i], join(path, "means") + "[" + std::to_string(i) + "]"));
  }
  Vec variances = as_vec(j["variances"], join(path, "variances"));
  if (weights.size() != means.size() || weights.size() != variances.size() || weights.empty()) {
    field_error(path, "weights, means and variances need the same nonzero length");
  }
  try {
    return GaussianMixture(std::move(weights), std::move(means), std::move(variances));
  } catch (const Error& e) {
    field_error(path, e.detail());
  }
}

std::string position_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Schedule ExperimentConfig::schedule() const { return Schedule::from_params(schedule_kind, schedule_params); }

StepPlan ExperimentConfig::step_plan() const {
  return make_step_plan(steps, plan.r, plan.warm_frac, plan.cool_frac);
}

void ExperimentConfig::validate() const {
  if (steps < 2) field_error("T", "must be >= 2");
  if (seeds.empty()) field_error("seeds", "at least one seed is required");
  try {
    (void)schedule();
  } catch (const Error& e) {
    field_error("schedule", e.detail());
  }
  try {
    (void)step_plan();
  } catch (const Error& e) {
    field_error("plan", e.detail());
  }
  switch (denoiser.kind) {
    case DenoiserKind::oracle:
    case DenoiserKind::noisy_oracle:
      if (!denoiser.gmm) field_error("denoiser.gmm", "required for oracle denoisers");
      if (!(denoiser.noise_std >= 0.0)) field_error("denoiser.noise_std", "must be >= 0");
      if (denoiser.kind == DenoiserKind::oracle && denoiser.noise_std != 0.0) {
        field_error("denoiser.noise_std", "only the noisy_oracle kind takes noise");
      }
      break;
    case DenoiserKind::recorded:
      if (denoiser.trace.empty()) field_error("denoiser.trace", "required for the recorded kind");
      if (denoiser.gmm) field_error("denoiser.gmm", "not allowed for the recorded kind");
      break;
  }
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config_error, "syntax error at " + position_of(text, e.byte > 0 ? e.byte - 1 : 0) +
                                             ": " + e.what());
  }
  require_object(root, "");
  reject_unknown(root, "", {"experiment", "schedule", "parameterization", "solver", "T", "plan", "strategy",
                            "compare_strategies", "denoiser", "seeds", "output_dir"});

  ExperimentConfig cfg;
  if (root.contains("experiment")) cfg.experiment = as_string(root["experiment"], "experiment");

  if (root.contains("schedule")) {
    const json& js = root["schedule"];
    if (js.is_string()) {
      cfg.schedule_kind = parse_field(js, "schedule", parse_schedule_kind);
    } else {
      require_object(js, "schedule");
      reject_unknown(js, "schedule", {"kind", "params"});
      if (!js.contains("kind")) field_error("schedule.kind", "missing");
      cfg.schedule_kind = parse_field(js["kind"], "schedule.kind", parse_schedule_kind);
      if (js.contains("params")) {
        require_object(js["params"], "schedule.params");
        for (const auto& [key, value] : js["params"].items()) {
          cfg.schedule_params[key] = as_number(value, "schedule.params." + key);
        }
      }
    }
  }

  bool have_parameterization = false;
  if (root.contains("parameterization")) {
    cfg.parameterization = parse_field(root["parameterization"], "parameterization", parse_parameterization);
    have_parameterization = true;
  }
  if (root.contains("solver")) cfg.solver = parse_field(root["solver"], "solver", parse_solver_kind);
  if (root.contains("T")) {
    const long long t = as_integer(root["T"], "T");
    if (t < 2 || t > 1000000) field_error("T", "must be in [2, 1000000]");
    cfg.steps = static_cast<int>(t);
  }

  if (root.contains("plan")) {
    const json& jp = require_object(root["plan"], "plan");
    reject_unknown(jp, "plan", {"r", "warm_frac", "cool_frac"});
    if (jp.contains("r")) {
      const long long r = as_integer(jp["r"], "plan.r");
      if (r < 0 || r > 1000) field_error("plan.r", "must be in [0, 1000]");
      cfg.plan.r = static_cast<int>(r);
    }
    if (jp.contains("warm_frac")) cfg.plan.warm_frac = as_number(jp["warm_frac"], "plan.warm_frac");
    if (jp.contains("cool_frac")) cfg.plan.cool_frac = as_number(jp["cool_frac"], "plan.cool_frac");
  }

  if (root.contains("strategy")) cfg.strategy = parse_field(root["strategy"], "strategy", parse_strategy);
  if (root.contains("compare_strategies")) {
    const json& jc = root["compare_strategies"];
    if (!jc.is_array()) field_error("compare_strategies", "expected an array of strategy names");
    for (std::size_t i = 0; i < jc.size(); ++i) {
      cfg.compare_strategies.push_back(
          parse_field(jc[i], "compare_strategies[" + std::to_string(i) + "]", parse_strategy));
    }
  }

  if (!root.contains("denoiser")) field_error("denoiser", "missing");
  {
    const json& jd = require_object(root["denoiser"], "denoiser");
    reject_unknown(jd, "denoiser", {"kind", "gmm", "noise_std", "trace"});
    const std::string kind = jd.contains("kind") ? as_string(jd["kind"], "denoiser.kind") : "oracle";
    if (kind == "oracle") {
      cfg.denoiser.kind = DenoiserKind::oracle;
    } else if (kind == "noisy_oracle") {
      cfg.denoiser.kind = DenoiserKind::noisy_oracle;
    } else if (kind == "recorded") {
      cfg.denoiser.kind = DenoiserKind::recorded;
    } else {
      field_error("denoiser.kind", "expected oracle, noisy_oracle or recorded, got '" + kind + "'");
    }
    if (jd.contains("gmm")) cfg.denoiser.gmm = parse_gmm(jd["gmm"], "denoiser.gmm");
    if (jd.contains("noise_std")) cfg.denoiser.noise_std = as_number(jd["noise_std"], "denoiser.noise_std");
    if (jd.contains("trace")) {
      std::filesystem::path p = as_string(jd["trace"], "denoiser.trace");
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      cfg.denoiser.trace = p.string();
    }
  }

  if (root.contains("seeds")) {
    const json& js = root["seeds"];
    cfg.seeds.clear();
    if (js.is_array()) {
      for (std::size_t i = 0; i < js.size(); ++i) {
        const long long s = as_integer(js[i], "seeds[" + std::to_string(i) + "]");
        if (s < 0) field_error("seeds[" + std::to_string(i) + "]", "must be >= 0");
        cfg.seeds.push_back(static_cast<std::uint64_t>(s));
      }
    } else if (js.is_object()) {
      reject_unknown(js, "seeds", {"count", "start"});
      if (!js.contains("count")) field_error("seeds.count", "missing");
      const long long count = as_integer(js["count"], "seeds.count");
      const long long start = js.contains("start") ? as_integer(js["start"], "seeds.start") : 0;
      if (count < 1 || count > 1000000) field_error("seeds.count", "must be in [1, 1000000]");
      if (start < 0) field_error("seeds.start", "must be >= 0");
      for (long long i = 0; i < count; ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(start + i));
    } else {
      field_error("seeds", "expected an array of integers or {count, start}");
    }
  }
  if (root.contains("output_dir")) cfg.output_dir = as_string(root["output_dir"], "output_dir");

  if (cfg.denoiser.kind == DenoiserKind::recorded) {
    const auto sidecar = trace_sidecar_parameterization(cfg.denoiser.trace);
    if (sidecar && have_parameterization && *sidecar != cfg.parameterization) {
      field_error("parameterization", "disagrees with the trace sidecar ('" +
                                          std::string(to_string(*sidecar)) + "')");
    }
    if (sidecar) cfg.parameterization = *sidecar;
    else if (!have_parameterization) field_error("parameterization", "required when the trace has no sidecar");
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str(), path.parent_path());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::config_error) throw;
    throw Error(ErrorCode::config_error, path.string() + ": " + e.detail());
  }
}

std::optional<Parameterization> trace_sidecar_parameterization(const std::filesystem::path& trace_path) {
  std::filesystem::path sidecar = trace_path;
  sidecar += ".json";
  std::ifstream in(sidecar, std::ios::binary);
  if (!in) return std::nullopt;
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config_error, sidecar.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("parameterization")) return std::nullopt;
  return parse_field(j["parameterization"], sidecar.string() + ":parameterization", parse_parameterization);
}

}  // namespace zeus
