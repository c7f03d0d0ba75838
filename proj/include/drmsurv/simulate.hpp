#ifndef DRMSURV_SIMULATE_HPP_
#define DRMSURV_SIMULATE_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "drmsurv/core.hpp"
#include "drmsurv/distributions.hpp"
#include "drmsurv/em.hpp"

namespace drmsurv {

using Rng = std::mt19937_64;

/// Seed of stream `index` under root `seed` (splitmix64 of both). Every
/// replication or resample owns one stream, so results do not depend on
/// which worker ran it.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

/// Worker count for `requested` threads; 0 means hardware concurrency.
int resolve_threads(int requested);

enum class CensoringMode {
  RC,           // C censors T directly
  LbrcResidual  // C censors the residual T - A of an accepted subject
};

/// Exponential censoring rate giving the target censored fraction.
///
/// RC mode is exact for the gamma family: P(C < T) = 1 - (1 + rate*scale)^-shape.
/// LBRC mode bisects a Monte Carlo estimate over 10^6 accepted subjects
/// drawn from the stream (seed, 0).
double calibrate_censoring_rate(const TrueDistSpec& dist, double target,
                                CensoringMode mode, double tau = 50.0,
                                std::uint64_t seed = 1);

/// X = min(T, C), delta = 1{T < C}; rate 0 disables censoring.
ObservedSample gen_rc_sample(const TrueDistSpec& dist, double rate, int n,
                             Rng& rng);

/// Length-biased sampling: draw A ~ U(0, tau) and T until T > A, then
/// X = min(T, A + C), delta = 1{T < A + C}.
ObservedSample gen_lbrc_sample(const TrueDistSpec& underlying, double tau,
                               double rate, int n, Rng& rng);

/// P(T > A) for A ~ U(0, tau).
double acceptance_probability(const TrueDistSpec& dist, double tau);

enum class Estimator { KmRc, KmLtrc, NpmleLbrc, NpmlePooled, Drm };

std::string estimator_key(Estimator e);    // "km_rc", ...
std::string estimator_label(Estimator e);  // "KM (RC)", ...
Estimator parse_estimator(const std::string& key);
const std::vector<Estimator>& all_estimators();

struct ScenarioConfig {
  TrueDistSpec rc_dist = TrueDistSpec::gamma(0.5, 2.0);
  TrueDistSpec lbrc_dist = TrueDistSpec::gamma(1.5, 2.0);
  double rc_cens_target = 0.15;
  double lbrc_cens_target = 0.15;
  int n_rc = 50;
  int n_lbrc = 50;
  double tau = 50.0;
  BasisSpec basis = BasisSpec::log();
  int n_replications = 1000;
  std::uint64_t seed = 1;
  std::vector<Estimator> estimators = all_estimators();
  int eval_points = 200;
  EmOptions em;
  int threads = 0;
  /// Precomputed censoring rates; negative means calibrate on the fly.
  double rc_rate = -1.0;
  double lbrc_rate = -1.0;
};

struct EstimatorSummary {
  Estimator estimator;
  double mean_ks = 0.0;
  double sd_ks = 0.0;  // NaN with fewer than two successes
  int successes = 0;
  int failures = 0;
  int unconverged = 0;
  std::vector<double> ks;  // per replication, NaN where the fit failed
};

struct ScenarioResult {
  double rc_rate = 0.0;
  double lbrc_rate = 0.0;
  std::vector<EstimatorSummary> summaries;
  /// DRM theta estimates per replication (empty rows where the fit failed).
  std::vector<Eigen::VectorXd> drm_theta;

  const EstimatorSummary& summary(Estimator e) const;
  Eigen::VectorXd mean_theta() const;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

/// Samples of one replication, exactly as run_scenario generates them.
struct ReplicationData {
  ObservedSample rc;
  ObservedSample lbrc;
};
ReplicationData generate_replication(const ScenarioConfig& config,
                                     double rc_rate, double lbrc_rate,
                                     std::uint64_t replication);

}  // namespace drmsurv

#endif  // DRMSURV_SIMULATE_HPP_
