#include "zeus/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "zeus/error.hpp"

namespace zeus {

namespace {

void require_finite(ConstVecView x, const char* where) {
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_state, std::string(where) + ": non-finite input");
  }
}

// Per-component log w_i + log N(x; alpha mu_i, V_i I), V_i = alpha^2 var_i + sigma^2.
Vec component_log_weights(const GaussianMixture& gmm, ConstVecView x, const ScheduleValues& sv) {
  const double d = static_cast<double>(gmm.dim());
  Vec logw(gmm.components());
  for (std::size_t i = 0; i < gmm.components(); ++i) {
    const double var = sv.alpha * sv.alpha * gmm.variances()[i] + sv.sigma * sv.sigma;
    double sq = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double r = x[k] - sv.alpha * gmm.means()[i][k];
      sq += r * r;
    }
    logw[i] = std::log(gmm.weights()[i]) - 0.5 * d * std::log(2.0 * std::numbers::pi * var) -
              0.5 * sq / var;
  }
  return logw;
}

double log_sum_exp(const Vec& v) {
  const double top = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double e : v) acc += std::exp(e - top);
  return top + std::log(acc);
}

}  // namespace

GaussianMixture::GaussianMixture(Vec weights, std::vector<Vec> means, Vec variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
  if (weights_.empty() || weights_.size() != means_.size() || weights_.size() != variances_.size()) {
    throw Error(ErrorCode::invalid_mixture, "weights, means and variances must be non-empty and aligned");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0)) throw Error(ErrorCode::invalid_mixture, "weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::invalid_mixture, "weights sum to " + std::to_string(total));
  }
  const std::size_t d = means_.front().size();
  if (d == 0) throw Error(ErrorCode::invalid_mixture, "zero-dimensional means");
  for (const auto& m : means_) {
    if (m.size() != d) throw Error(ErrorCode::invalid_mixture, "means differ in dimension");
  }
  for (double v : variances_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::invalid_mixture, "variances must be positive");
  }
}

GaussianMixture GaussianMixture::single(Vec mean, double variance) {
  return GaussianMixture({1.0}, {std::move(mean)}, {variance});
}

Vec GaussianMixture::mean() const {
  Vec out(dim(), 0.0);
  for (std::size_t i = 0; i < components(); ++i) {
    for (std::size_t k = 0; k < dim(); ++k) out[k] += weights_[i] * means_[i][k];
  }
  return out;
}

Vec GaussianMixture::sample(CounterRng& rng) const {
  const double u = rng.uniform();
  std::size_t pick = components() - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < components(); ++i) {
    acc += weights_[i];
    if (u < acc) {
      pick = i;
      break;
    }
  }
  const double sd = std::sqrt(variances_[pick]);
  Vec x(dim());
  for (std::size_t k = 0; k < dim(); ++k) x[k] = means_[pick][k] + sd * rng.normal();
  return x;
}

Posterior posterior(const GaussianMixture& gmm, ConstVecView x, const ScheduleValues& sv) {
  require_same_size(x.size(), gmm.dim(), "posterior");
  require_finite(x, "posterior");
  const Vec logw = component_log_weights(gmm, x, sv);
  const double norm = log_sum_exp(logw);

  Posterior post{Vec(x.size(), 0.0), Vec(x.size(), 0.0)};
  for (std::size_t i = 0; i < gmm.components(); ++i) {
    const double resp = std::exp(logw[i] - norm);
    if (resp == 0.0) continue;
    const double var = sv.alpha * sv.alpha * gmm.variances()[i] + sv.sigma * sv.sigma;
    const double gain_x0 = sv.alpha * gmm.variances()[i] / var;
    const double gain_eps = sv.sigma / var;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double r = x[k] - sv.alpha * gmm.means()[i][k];
      post.x0[k] += resp * (gmm.means()[i][k] + gain_x0 * r);
      post.eps[k] += resp * gain_eps * r;
    }
  }
  return post;
}

Vec posterior_mean(const GaussianMixture& gmm, ConstVecView x, const Schedule& sched, double s) {
  return posterior(gmm, x, sched.eval(s)).x0;
}

Vec score(const GaussianMixture& gmm, ConstVecView x, const Schedule& sched, double s) {
  const ScheduleValues sv = sched.eval(s);
  if (sv.sigma == 0.0) throw Error(ErrorCode::singular_score, "sigma is zero");
  Vec out = posterior(gmm, x, sv).eps;
  for (double& v : out) v = -v / sv.sigma;
  return out;
}

double log_density(const GaussianMixture& gmm, ConstVecView x, const Schedule& sched, double s) {
  require_same_size(x.size(), gmm.dim(), "log_density");
  require_finite(x, "log_density");
  return log_sum_exp(component_log_weights(gmm, x, sched.eval(s)));
}

Vec oracle_target(const GaussianMixture& gmm, Parameterization p, ConstVecView x,
                  const ScheduleValues& sv) {
  const Posterior post = posterior(gmm, x, sv);
  const TargetCoeffs c = target_coeffs(p, sv);
  Vec out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = c.u * post.eps[k] + c.v * post.x0[k];
  return out;
}

Vec Denoiser::evaluate(ConstVecView x, double s, int t) {
  Vec out = do_evaluate(x, s, t);
  ++calls_;
  return out;
}

OracleDenoiser::OracleDenoiser(GaussianMixture gmm, Schedule sched, Parameterization p)
    : Denoiser(p), gmm_(std::move(gmm)), sched_(std::move(sched)) {}

Vec OracleDenoiser::target(ConstVecView x, double s, Parameterization p) const {
  return oracle_target(gmm_, p, x, sched_.eval(s));
}

Vec OracleDenoiser::do_evaluate(ConstVecView x, double s, int) {
  return target(x, s, parameterization());
}

NoisyOracleDenoiser::NoisyOracleDenoiser(GaussianMixture gmm, Schedule sched, Parameterization p,
                                         double noise_std, CounterRng rng)
    : Denoiser(p), oracle_(std::move(gmm), std::move(sched), p), noise_std_(noise_std), rng_(rng) {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw Error(ErrorCode::invalid_argument, "noise_std must be finite and non-negative");
  }
}

Vec NoisyOracleDenoiser::do_evaluate(ConstVecView x, double s, int) {
  Vec out = oracle_.target(x, s, parameterization());
  if (noise_std_ > 0.0) {
    for (double& v : out) v += noise_std_ * rng_.normal();
  }
  return out;
}

RecordedDenoiser::RecordedDenoiser(Trace trace, Parameterization p)
    : Denoiser(p), trace_(std::move(trace)) {
  validate_trace(trace_);
}

const TraceRecord& RecordedDenoiser::consume(int t) {
  if (cursor_ >= trace_.records.size()) {
    throw Error(ErrorCode::trace_desync, "trace exhausted after " + std::to_string(cursor_) +
                                             " records; step " + std::to_string(t) + " requested");
  }
  const TraceRecord& rec = trace_.records[cursor_];
  if (t < 0 || rec.step != static_cast<std::uint32_t>(t)) {
    throw Error(ErrorCode::trace_desync, "expected step " + std::to_string(rec.step) + ", got " +
                                             std::to_string(t));
  }
  ++cursor_;
  return rec;
}

void RecordedDenoiser::skip(int t) { consume(t); }

Vec RecordedDenoiser::do_evaluate(ConstVecView x, double, int t) {
  require_same_size(x.size(), static_cast<std::size_t>(trace_.dim), "recorded denoiser");
  const TraceRecord& rec = consume(t);
  return Vec(rec.psi.begin(), rec.psi.end());
}

std::unique_ptr<RecordedDenoiser> read_trace_denoiser(const std::string& path, Parameterization p) {
  return std::make_unique<RecordedDenoiser>(read_trace(path), p);
}

}  // namespace zeus
