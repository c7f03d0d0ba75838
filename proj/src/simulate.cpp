#include "drmsurv/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "drmsurv/classic.hpp"
#include "drmsurv/metrics.hpp"

namespace drmsurv {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double draw_exponential(double rate, Rng& rng) {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  std::exponential_distribution<double> e(rate);
  double c = e(rng);
  while (!(c > 0.0)) c = e(rng);
  return c;
}

double draw_failure(const TrueDistSpec& dist, Rng& rng) {
  double t = dist.sample(rng);
  while (!(t > 0.0)) t = dist.sample(rng);
  return t;
}

void check_target(double target) {
  if (!(target >= 0.0 && target < 1.0))
    throw Error(ErrorKind::InvalidInput,
                "censoring target must lie in [0, 1)");
}

// Residual times T - A of accepted length-biased subjects.
std::vector<double> residual_draws(const TrueDistSpec& dist, double tau,
                                   std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, tau);
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const double a = unif(rng);
    const double t = draw_failure(dist, rng);
    if (t > a) out.push_back(t - a);
  }
  return out;
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

double acceptance_probability(const TrueDistSpec& dist, double tau) {
  if (!(tau > 0.0))
    throw Error(ErrorKind::InvalidInput, "tau must be positive");
  return dist.truncated_mean(tau) / tau;
}

double calibrate_censoring_rate(const TrueDistSpec& dist, double target,
                                CensoringMode mode, double tau,
                                std::uint64_t seed) {
  check_target(target);
  if (target == 0.0) return 0.0;

  if (mode == CensoringMode::RC) {
    // Laplace transform of the gamma law: E exp(-rate T) = (1 + rate*scale)^-shape.
    return (std::pow(1.0 - target, -1.0 / dist.shape) - 1.0) / dist.scale;
  }

  if (acceptance_probability(dist, tau) < 1e-6)
    throw Error(ErrorKind::TauTooLarge,
                "tau too large relative to the failure-time law");
  Rng rng(stream_seed(seed, 0));
  const std::vector<double> resid = residual_draws(dist, tau, 1000000, rng);
  auto censored_fraction = [&](double rate) {
    double acc = 0.0;
    for (double r : resid) acc += -std::expm1(-rate * r);
    return acc / static_cast<double>(resid.size());
  };

  double lo = 0.0;
  double hi = 1.0 / dist.mean();
  while (censored_fraction(hi) < target) {
    hi *= 2.0;
    if (hi > 1e8)
      throw Error(ErrorKind::CalibrationFailed,
                  "cannot bracket the censoring rate for the target");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (censored_fraction(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

ObservedSample gen_rc_sample(const TrueDistSpec& dist, double rate, int n,
                             Rng& rng) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "sample size must be >= 1");
  std::vector<double> x(static_cast<std::size_t>(n));
  std::vector<int> delta(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = draw_failure(dist, rng);
    const double c = draw_exponential(rate, rng);
    x[i] = std::min(t, c);
    delta[i] = t < c ? 1 : 0;
  }
  return ObservedSample::right_censored(std::move(x), std::move(delta));
}

ObservedSample gen_lbrc_sample(const TrueDistSpec& underlying, double tau,
                               double rate, int n, Rng& rng) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "sample size must be >= 1");
  if (acceptance_probability(underlying, tau) < 1e-6)
    throw Error(ErrorKind::TauTooLarge,
                "tau too large relative to the failure-time law");
  std::uniform_real_distribution<double> unif(0.0, tau);
  std::vector<double> a(static_cast<std::size_t>(n)),
      x(static_cast<std::size_t>(n));
  std::vector<int> delta(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < x.size(); ++i) {
    double entry = 0.0, t = 0.0;
    do {
      entry = unif(rng);
      t = draw_failure(underlying, rng);
    } while (!(t > entry));
    const double exit = entry + draw_exponential(rate, rng);
    a[i] = entry;
    x[i] = std::min(t, exit);
    delta[i] = t < exit ? 1 : 0;
  }
  return ObservedSample::length_biased(std::move(a), std::move(x),
                                       std::move(delta));
}

std::string estimator_key(Estimator e) {
  switch (e) {
    case Estimator::KmRc: return "km_rc";
    case Estimator::KmLtrc: return "km_ltrc";
    case Estimator::NpmleLbrc: return "npmle_lbrc";
    case Estimator::NpmlePooled: return "npmle_pooled";
    case Estimator::Drm: return "drm";
  }
  return "?";
}

std::string estimator_label(Estimator e) {
  switch (e) {
    case Estimator::KmRc: return "KM (RC)";
    case Estimator::KmLtrc: return "KM (LTRC)";
    case Estimator::NpmleLbrc: return "NPMLE (LBRC)";
    case Estimator::NpmlePooled: return "NPMLE (RC+LBRC)";
    case Estimator::Drm: return "DRM";
  }
  return "?";
}

Estimator parse_estimator(const std::string& key) {
  for (Estimator e : all_estimators())
    if (estimator_key(e) == key) return e;
  throw Error(ErrorKind::InvalidInput, "unknown estimator '" + key + "'");
}

const std::vector<Estimator>& all_estimators() {
  static const std::vector<Estimator> all{
      Estimator::KmRc, Estimator::KmLtrc, Estimator::NpmleLbrc,
      Estimator::NpmlePooled, Estimator::Drm};
  return all;
}

const EstimatorSummary& ScenarioResult::summary(Estimator e) const {
  for (const auto& s : summaries)
    if (s.estimator == e) return s;
  throw Error(ErrorKind::InvalidInput,
              "estimator " + estimator_key(e) + " was not run");
}

Eigen::VectorXd ScenarioResult::mean_theta() const {
  Eigen::VectorXd acc;
  int count = 0;
  for (const auto& th : drm_theta) {
    if (th.size() == 0) continue;
    if (acc.size() == 0) acc = Eigen::VectorXd::Zero(th.size());
    acc += th;
    ++count;
  }
  return count > 0 ? Eigen::VectorXd(acc / count) : acc;
}

ReplicationData generate_replication(const ScenarioConfig& config,
                                     double rc_rate, double lbrc_rate,
                                     std::uint64_t replication) {
  Rng rng(stream_seed(config.seed, replication + 1));
  ObservedSample rc = gen_rc_sample(config.rc_dist, rc_rate, config.n_rc, rng);
  ObservedSample lbrc = gen_lbrc_sample(config.lbrc_dist, config.tau,
                                        lbrc_rate, config.n_lbrc, rng);
  return {std::move(rc), std::move(lbrc)};
}

namespace {

struct ReplicationOutcome {
  std::vector<double> ks;         // per requested estimator
  std::vector<bool> unconverged;  // per requested estimator
  Eigen::VectorXd theta;
};

// KS against the truth each estimator targets: the reference law for
// estimators that use the RC arm, the LBRC arm's underlying law otherwise.
bool targets_reference(Estimator e) {
  return e == Estimator::KmRc || e == Estimator::NpmlePooled ||
         e == Estimator::Drm;
}

ReplicationOutcome run_replication(const ScenarioConfig& cfg, double rc_rate,
                                   double lbrc_rate, std::uint64_t r,
                                   const EvalGrid& ref_grid,
                                   const EvalGrid& lb_grid) {
  const ReplicationData data = generate_replication(cfg, rc_rate, lbrc_rate, r);
  ReplicationOutcome out;
  out.ks.assign(cfg.estimators.size(),
                std::numeric_limits<double>::quiet_NaN());
  out.unconverged.assign(cfg.estimators.size(), false);
  for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
    const Estimator est = cfg.estimators[e];
    try {
      std::optional<SurvivalCurve> curve;
      switch (est) {
        case Estimator::KmRc: curve = fit_km(data.rc); break;
        case Estimator::KmLtrc: curve = fit_km_ltrc(data.lbrc); break;
        case Estimator::NpmleLbrc: {
          const DrmFit f = fit_npmle_lbrc(data.lbrc, cfg.em);
          out.unconverged[e] = !f.converged;
          curve = f.reference_curve();
          break;
        }
        case Estimator::NpmlePooled: {
          const DrmFit f = fit_pooled_npmle(&data.rc, &data.lbrc, cfg.em);
          out.unconverged[e] = !f.converged;
          curve = f.reference_curve();
          break;
        }
        case Estimator::Drm: {
          const DrmFit f = fit_drm(data.rc, data.lbrc, cfg.basis, cfg.em);
          out.unconverged[e] = !f.converged;
          out.theta = f.params.theta;
          curve = f.reference_curve();
          break;
        }
      }
      const bool ref = targets_reference(est);
      out.ks[e] = ks_distance(*curve, ref ? cfg.rc_dist : cfg.lbrc_dist,
                              ref ? ref_grid : lb_grid);
    } catch (const Error&) {
      // Counted as a failure and excluded from the aggregates.
    }
  }
  return out;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  if (cfg.n_replications < 1)
    throw Error(ErrorKind::InvalidInput, "need at least one replication");
  if (cfg.n_rc < 1 || cfg.n_lbrc < 1)
    throw Error(ErrorKind::InvalidInput, "sample sizes must be >= 1");
  if (cfg.estimators.empty())
    throw Error(ErrorKind::InvalidInput, "no estimators requested");

  ScenarioResult result;
  result.rc_rate = cfg.rc_rate >= 0.0
                       ? cfg.rc_rate
                       : calibrate_censoring_rate(cfg.rc_dist, cfg.rc_cens_target,
                                                  CensoringMode::RC);
  result.lbrc_rate =
      cfg.lbrc_rate >= 0.0
          ? cfg.lbrc_rate
          : calibrate_censoring_rate(cfg.lbrc_dist, cfg.lbrc_cens_target,
                                     CensoringMode::LbrcResidual, cfg.tau,
                                     cfg.seed);
  const EvalGrid ref_grid = make_eval_grid(cfg.rc_dist, cfg.eval_points);
  const EvalGrid lb_grid = make_eval_grid(cfg.lbrc_dist, cfg.eval_points);

  const auto reps = static_cast<std::size_t>(cfg.n_replications);
  std::vector<ReplicationOutcome> outcomes(reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++)
      outcomes[r] = run_replication(cfg, result.rc_rate, result.lbrc_rate, r,
                                    ref_grid, lb_grid);
  };
  const int n_threads =
      std::min<int>(resolve_threads(cfg.threads), static_cast<int>(reps));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Aggregate in replication order so the result is schedule independent.
  for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
    EstimatorSummary s;
    s.estimator = cfg.estimators[e];
    double mean = 0.0, m2 = 0.0;
    for (const auto& o : outcomes) {
      const double v = o.ks[e];
      s.ks.push_back(v);
      if (std::isnan(v)) {
        ++s.failures;
        continue;
      }
      if (o.unconverged[e]) ++s.unconverged;
      ++s.successes;
      const double delta = v - mean;
      mean += delta / s.successes;
      m2 += delta * (v - mean);
    }
    s.mean_ks = s.successes > 0 ? mean : std::numeric_limits<double>::quiet_NaN();
    s.sd_ks = s.successes > 1 ? std::sqrt(m2 / (s.successes - 1))
                              : std::numeric_limits<double>::quiet_NaN();
    result.summaries.push_back(std::move(s));
  }
  for (auto& o : outcomes) result.drm_theta.push_back(std::move(o.theta));
  return result;
}

}  // namespace drmsurv
