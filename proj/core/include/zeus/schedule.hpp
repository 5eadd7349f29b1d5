#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace zeus {

enum class ScheduleKind { vp_linear, vp_cosine, rectified_flow };

std::string_view to_string(ScheduleKind kind) noexcept;
ScheduleKind parse_schedule_kind(std::string_view name);

/// Schedule values at one time s, with analytic derivatives in s.
struct ScheduleValues {
  double alpha = 1.0;
  double sigma = 0.0;
  double dalpha = 0.0;
  double dsigma = 0.0;

  /// log(alpha / sigma); throws log_snr_undefined when sigma == 0.
  double log_snr() const;
};

/// Forward-process coefficients x_s = alpha_s x_0 + sigma_s eps on s in [0, 1].
///
/// Variance-preserving kinds keep alpha^2 + sigma^2 = 1 and clamp s from
/// below at the point where sigma reaches `kSigmaFloor`, so the log-SNR stays
/// finite at the data end. The rectified-flow path is exact: alpha = 1 - s,
/// sigma = s.
class Schedule {
 public:
  static constexpr double kSigmaFloor = 1e-4;

  /// beta(s) = beta_min + (beta_max - beta_min) s, alpha_s = exp(-1/2 int_0^s beta).
  static Schedule vp_linear(double beta_min = 0.1, double beta_max = 20.0);
  /// alpha_s = cos(theta_max s), sigma_s = sin(theta_max s).
  static Schedule vp_cosine(double theta_max = kDefaultThetaMax);
  static Schedule rectified_flow();

  /// Builds from a kind plus named parameters; unknown names are rejected.
  static Schedule from_params(ScheduleKind kind, const std::map<std::string, double>& params);

  ScheduleKind kind() const noexcept { return kind_; }
  const std::map<std::string, double>& params() const noexcept { return params_; }

  /// Throws invalid_argument for s outside [0, 1] or non-finite s.
  ScheduleValues eval(double s) const;

  /// Lower clamp applied to s (0 for rectified flow).
  double s_floor() const noexcept { return s_floor_; }

  static constexpr double kDefaultThetaMax = 1.5607963267948966;  // pi/2 - 0.01

 private:
  Schedule(ScheduleKind kind, std::map<std::string, double> params);

  ScheduleKind kind_;
  std::map<std::string, double> params_;
  double s_floor_ = 0.0;
};

/// Uniform grid s_t = t / T, t = 0..T. Sampling runs from t = T down to 0.
class TimeGrid {
 public:
  explicit TimeGrid(int steps);

  int steps() const noexcept { return steps_; }
  double delta() const noexcept { return 1.0 / steps_; }
  /// s_t for t in [0, T].
  double s(int t) const;
  /// Nodes in sampling order: s_T, s_{T-1}, ..., s_0.
  std::vector<double> sampling_nodes() const;

 private:
  int steps_;
  std::vector<double> nodes_;
};

/// Throws invalid_grid when T < 2.
TimeGrid make_grid(int steps);

}  // namespace zeus
