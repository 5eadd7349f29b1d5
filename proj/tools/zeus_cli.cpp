// zeus: command-line front end for the experiment harness.
//
// Exit codes: 0 success, 1 verification failure, 2 bad input (config, trace,
// axis or I/O), 3 internal error.

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zeus/error.hpp"
#include "zeus/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kBadInput = 2;
constexpr int kInternal = 3;

std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::filesystem::path resolve_out(const std::string& flag, const zeus::ExperimentConfig& cfg) {
  if (!flag.empty()) return flag;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  throw zeus::Error(zeus::ErrorCode::config_error, "no output directory: pass --out or set output_dir");
}

void print_files(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zeus: step-skipping experiments on analytic diffusion denoisers"};
  app.require_subcommand(1);

  std::string config_path, out_dir, axis, values, suite_name = "all", trace_path;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run baseline and accelerated samplers for every seed");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (defaults to the config's output_dir)");

  auto* sw = app.add_subcommand("sweep", "Run the experiment once per value of one axis");
  sw->add_option("--config", config_path, "Experiment config (JSON)")->required();
  sw->add_option("--axis", axis,
                 "r | strategy | lagrange-order | solver | parameterization | T | noise_std | warm_frac | cool_frac")
      ->required();
  sw->add_option("--values", values, "Comma-separated values")->required();
  sw->add_option("--out", out_dir, "Output directory (defaults to the config's output_dir)");

  auto* ver = app.add_subcommand("verify", "Run analysis suites and write a pass/fail report");
  ver->add_option("--suite", suite_name,
                  "blue | lagrange | bias_variance | minimax | lebesgue | trend | convergence | all")
      ->capture_default_str();
  ver->add_option("--out", out_dir, "Output directory")->required();
  ver->add_option("--seed", seed, "Seed for the Monte-Carlo suites")->capture_default_str();

  auto* rep = app.add_subcommand("replay", "Replay a recorded trace through the configured plan");
  rep->add_option("--trace", trace_path, "Trace file (.ztrc)")->required();
  rep->add_option("--config", config_path, "Experiment config (JSON)")->required();
  rep->add_option("--out", out_dir, "Output directory (defaults to the config's output_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*run) {
      const auto cfg = zeus::load_config(config_path);
      const auto result = zeus::run_experiment(cfg);
      print_files(zeus::write_run(result, resolve_out(out_dir, cfg)));
      for (const auto& s : result.summaries) {
        std::printf("%-12s nfe=%llu mean_mse=%.6g\n", zeus::to_string(s.strategy).c_str(),
                    static_cast<unsigned long long>(s.nfe), s.final_mse.mean);
      }
      for (const auto& [name, rate] : result.win_rate) std::printf("win_rate vs %s: %.3f\n", name.c_str(), rate);
    } else if (*sw) {
      const auto cfg = zeus::load_config(config_path);
      const auto cells = zeus::sweep(cfg, axis, split_values(values));
      print_files(zeus::write_sweep(cells, axis, resolve_out(out_dir, cfg)));
    } else if (*ver) {
      const auto suite = zeus::parse_verify_suite(suite_name);
      const auto result = zeus::verify(suite, out_dir, seed);
      print_files(result.files);
      for (const auto& s : result.suites) {
        std::printf("%-14s %s\n", zeus::to_string(s.suite).c_str(), s.passed ? "PASS" : "FAIL");
      }
      return result.passed ? kOk : kVerifyFailed;
    } else if (*rep) {
      const auto cfg = zeus::load_config(config_path);
      const auto result = zeus::replay(trace_path, cfg, resolve_out(out_dir, cfg));
      print_files(result.files);
      std::printf("replayed %zu steps with %llu fresh evaluations\n", result.steps,
                  static_cast<unsigned long long>(result.nfe));
    }
  } catch (const zeus::Error& e) {
    std::fprintf(stderr, "zeus: %s\n", e.what());
    switch (e.code()) {
      case zeus::ErrorCode::config_error:
      case zeus::ErrorCode::io_error:
      case zeus::ErrorCode::unknown_axis:
      case zeus::ErrorCode::trace_desync:
      case zeus::ErrorCode::trace_format_error:
        return kBadInput;
      default:
        return kInternal;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "zeus: internal error: %s\n", e.what());
    return kInternal;
  }
  return kOk;
}
