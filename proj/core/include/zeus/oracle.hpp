#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "zeus/parameterization.hpp"
#include "zeus/rng.hpp"
#include "zeus/schedule.hpp"
#include "zeus/trace.hpp"
#include "zeus/types.hpp"

namespace zeus {

/// Isotropic Gaussian mixture over R^d: component i is N(mean_i, variance_i I).
class GaussianMixture {
 public:
  /// Throws invalid_mixture unless weights are positive and sum to 1 within
  /// 1e-12, variances are positive and all means share one dimension.
  GaussianMixture(Vec weights, std::vector<Vec> means, Vec variances);

  /// Single component N(mean, variance I).
  static GaussianMixture single(Vec mean, double variance);

  std::size_t dim() const noexcept { return means_.front().size(); }
  std::size_t components() const noexcept { return weights_.size(); }
  const Vec& weights() const noexcept { return weights_; }
  const std::vector<Vec>& means() const noexcept { return means_; }
  const Vec& variances() const noexcept { return variances_; }

  /// E[x0] = sum_i w_i mean_i.
  Vec mean() const;
  Vec sample(CounterRng& rng) const;

 private:
  Vec weights_;
  std::vector<Vec> means_;
  Vec variances_;
};

/// Posterior expectations of the clean sample and of the noise given x_s.
struct Posterior {
  Vec x0;
  Vec eps;
};

/// E[x0 | x_s = x] and E[eps | x_s = x] under the mixture, with
/// responsibilities normalised in log space. Finite at sigma = 0 and at
/// alpha = 0. Throws invalid_state on non-finite input.
Posterior posterior(const GaussianMixture& gmm, ConstVecView x, const ScheduleValues& sv);

Vec posterior_mean(const GaussianMixture& gmm, ConstVecView x, const Schedule& sched, double s);

/// Marginal score grad log q_s(x) = -E[eps | x] / sigma. Throws singular_score at sigma = 0.
Vec score(const GaussianMixture& gmm, ConstVecView x, const Schedule& sched, double s);

/// log q_s(x) of the noised mixture.
double log_density(const GaussianMixture& gmm, ConstVecView x, const Schedule& sched, double s);

/// Exact conditional-expectation target for `p` at (x, s), assembled as
/// u_s E[eps|x] + v_s E[x0|x].
Vec oracle_target(const GaussianMixture& gmm, Parameterization p, ConstVecView x,
                  const ScheduleValues& sv);

enum class DenoiserKind { oracle, noisy_oracle, recorded };

/// A psi_theta(x, s) source with an exact count of fresh evaluations.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual DenoiserKind kind() const noexcept = 0;
  Parameterization parameterization() const noexcept { return parameterization_; }
  std::uint64_t call_count() const noexcept { return calls_; }

  /// One fresh evaluation at sampling step t; increments the call counter.
  Vec evaluate(ConstVecView x, double s, int t);

  /// Informs the source that step t was served without evaluation. Only the
  /// recorded kind uses this, to keep its replay cursor aligned.
  virtual void skip(int t) { (void)t; }

  /// Non-null for the oracle-backed kinds.
  virtual const GaussianMixture* mixture() const noexcept { return nullptr; }
  virtual const Schedule* schedule() const noexcept { return nullptr; }

 protected:
  explicit Denoiser(Parameterization p) : parameterization_(p) {}
  virtual Vec do_evaluate(ConstVecView x, double s, int t) = 0;

 private:
  Parameterization parameterization_;
  std::uint64_t calls_ = 0;
};

class OracleDenoiser : public Denoiser {
 public:
  OracleDenoiser(GaussianMixture gmm, Schedule sched, Parameterization p);

  DenoiserKind kind() const noexcept override { return DenoiserKind::oracle; }
  const GaussianMixture* mixture() const noexcept override { return &gmm_; }
  const Schedule* schedule() const noexcept override { return &sched_; }

  /// Same value as evaluate() without touching the call counter.
  Vec target(ConstVecView x, double s, Parameterization p) const;

 protected:
  Vec do_evaluate(ConstVecView x, double s, int t) override;

 private:
  GaussianMixture gmm_;
  Schedule sched_;
};

/// Oracle output plus i.i.d. N(0, noise_std^2 I) drawn from a per-trajectory stream.
class NoisyOracleDenoiser : public Denoiser {
 public:
  NoisyOracleDenoiser(GaussianMixture gmm, Schedule sched, Parameterization p, double noise_std,
                      CounterRng rng);

  DenoiserKind kind() const noexcept override { return DenoiserKind::noisy_oracle; }
  const GaussianMixture* mixture() const noexcept override { return oracle_.mixture(); }
  const Schedule* schedule() const noexcept override { return oracle_.schedule(); }
  double noise_std() const noexcept { return noise_std_; }

 protected:
  Vec do_evaluate(ConstVecView x, double s, int t) override;

 private:
  OracleDenoiser oracle_;
  double noise_std_;
  CounterRng rng_;
};

/// Replays a trace strictly in file order.
class RecordedDenoiser : public Denoiser {
 public:
  RecordedDenoiser(Trace trace, Parameterization p);

  DenoiserKind kind() const noexcept override { return DenoiserKind::recorded; }
  void skip(int t) override;

  const Trace& trace() const noexcept { return trace_; }
  std::size_t cursor() const noexcept { return cursor_; }

 protected:
  Vec do_evaluate(ConstVecView x, double s, int t) override;

 private:
  const TraceRecord& consume(int t);

  Trace trace_;
  std::size_t cursor_ = 0;
};

/// Opens a trace file as a recorded denoiser.
std::unique_ptr<RecordedDenoiser> read_trace_denoiser(const std::string& path, Parameterization p);

}  // namespace zeus
