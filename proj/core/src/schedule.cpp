#include "zeus/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zeus/error.hpp"

namespace zeus {

std::string_view to_string(ScheduleKind kind) noexcept {
  switch (kind) {
    case ScheduleKind::vp_linear: return "vp_linear";
    case ScheduleKind::vp_cosine: return "vp_cosine";
    case ScheduleKind::rectified_flow: return "rectified_flow";
  }
  return "unknown";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "vp_linear") return ScheduleKind::vp_linear;
  if (name == "vp_cosine") return ScheduleKind::vp_cosine;
  if (name == "rectified_flow") return ScheduleKind::rectified_flow;
  throw Error(ErrorCode::invalid_argument, "unknown schedule kind '" + std::string(name) + "'");
}

double ScheduleValues::log_snr() const {
  if (sigma == 0.0) {
    throw Error(ErrorCode::log_snr_undefined, "sigma is zero");
  }
  return std::log(alpha / sigma);
}

Schedule::Schedule(ScheduleKind kind, std::map<std::string, double> params)
    : kind_(kind), params_(std::move(params)) {
  const double floor_sq = kSigmaFloor * kSigmaFloor;
  switch (kind_) {
    case ScheduleKind::vp_linear: {
      const double beta_min = params_.at("beta_min");
      const double beta_max = params_.at("beta_max");
      if (!(beta_min > 0.0) || !(beta_max >= beta_min) || !std::isfinite(beta_max)) {
        throw Error(ErrorCode::invalid_argument, "vp_linear needs 0 < beta_min <= beta_max");
      }
      // Solve 1/2 (beta_max - beta_min) s^2 + beta_min s = -log(1 - floor^2).
      const double c = -std::log1p(-floor_sq);
      const double a = 0.5 * (beta_max - beta_min);
      s_floor_ = a == 0.0 ? c / beta_min
                          : 2.0 * c / (beta_min + std::sqrt(beta_min * beta_min + 4.0 * a * c));
      break;
    }
    case ScheduleKind::vp_cosine: {
      const double theta_max = params_.at("theta_max");
      if (!(theta_max > 0.0) || !(theta_max < 1.5707963267948966)) {
        throw Error(ErrorCode::invalid_argument, "vp_cosine needs 0 < theta_max < pi/2");
      }
      s_floor_ = std::asin(kSigmaFloor) / theta_max;
      break;
    }
    case ScheduleKind::rectified_flow:
      s_floor_ = 0.0;
      break;
  }
}

Schedule Schedule::vp_linear(double beta_min, double beta_max) {
  return Schedule(ScheduleKind::vp_linear, {{"beta_min", beta_min}, {"beta_max", beta_max}});
}

Schedule Schedule::vp_cosine(double theta_max) {
  return Schedule(ScheduleKind::vp_cosine, {{"theta_max", theta_max}});
}

Schedule Schedule::rectified_flow() { return Schedule(ScheduleKind::rectified_flow, {}); }

Schedule Schedule::from_params(ScheduleKind kind, const std::map<std::string, double>& params) {
  std::map<std::string, double> merged;
  switch (kind) {
    case ScheduleKind::vp_linear: merged = {{"beta_min", 0.1}, {"beta_max", 20.0}}; break;
    case ScheduleKind::vp_cosine: merged = {{"theta_max", kDefaultThetaMax}}; break;
    case ScheduleKind::rectified_flow: break;
  }
  for (const auto& [name, value] : params) {
    if (!merged.contains(name)) {
      throw Error(ErrorCode::invalid_argument, "schedule " + std::string(to_string(kind)) +
                                                   " has no parameter '" + name + "'");
    }
    merged[name] = value;
  }
  return Schedule(kind, std::move(merged));
}

ScheduleValues Schedule::eval(double s) const {
  if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
    throw Error(ErrorCode::invalid_argument, "schedule time outside [0, 1]: " + std::to_string(s));
  }
  ScheduleValues v;
  switch (kind_) {
    case ScheduleKind::vp_linear: {
      const double beta_min = params_.at("beta_min");
      const double beta_max = params_.at("beta_max");
      const double u = std::max(s, s_floor_);
      const double log_alpha = -0.5 * beta_min * u - 0.25 * (beta_max - beta_min) * u * u;
      const double dlog_alpha = -0.5 * (beta_min + (beta_max - beta_min) * u);
      v.alpha = std::exp(log_alpha);
      v.sigma = std::sqrt(-std::expm1(2.0 * log_alpha));
      v.dalpha = v.alpha * dlog_alpha;
      v.dsigma = -v.alpha * v.dalpha / v.sigma;
      break;
    }
    case ScheduleKind::vp_cosine: {
      const double theta_max = params_.at("theta_max");
      const double theta = theta_max * std::max(s, s_floor_);
      v.alpha = std::cos(theta);
      v.sigma = std::sin(theta);
      v.dalpha = -theta_max * v.sigma;
      v.dsigma = theta_max * v.alpha;
      break;
    }
    case ScheduleKind::rectified_flow:
      v.alpha = 1.0 - s;
      v.sigma = s;
      v.dalpha = -1.0;
      v.dsigma = 1.0;
      break;
  }
  return v;
}

TimeGrid::TimeGrid(int steps) : steps_(steps) {
  if (steps < 2) {
    throw Error(ErrorCode::invalid_grid, "T must be at least 2, got " + std::to_string(steps));
  }
  nodes_.resize(static_cast<std::size_t>(steps) + 1);
  for (int t = 0; t <= steps; ++t) {
    nodes_[static_cast<std::size_t>(t)] = static_cast<double>(t) / steps;
  }
}

double TimeGrid::s(int t) const {
  if (t < 0 || t > steps_) {
    throw Error(ErrorCode::invalid_argument, "grid index out of range: " + std::to_string(t));
  }
  return nodes_[static_cast<std::size_t>(t)];
}

std::vector<double> TimeGrid::sampling_nodes() const { return {nodes_.rbegin(), nodes_.rend()}; }

TimeGrid make_grid(int steps) { return TimeGrid(steps); }

}  // namespace zeus
