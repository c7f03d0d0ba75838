#include "drmsurv/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <thread>

#include "drmsurv/simulate.hpp"

namespace drmsurv {

double percentile(std::vector<double> values, double prob) {
  if (values.empty())
    throw Error(ErrorKind::InvalidInput, "percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

bool BootstrapResult::zero_outside_theta_ci() const {
  if (theta_ci.empty()) return false;
  return std::none_of(theta_ci.begin(), theta_ci.end(),
                      [](const Interval& ci) { return ci.contains(0.0); });
}

namespace {

struct Replicate {
  bool ok = false;
  Eigen::VectorXd theta;
  Eigen::VectorXd survival;
};

}  // namespace

BootstrapResult bootstrap_drm(const ObservedSample& rc,
                              const ObservedSample& lbrc,
                              const BasisSpec& basis,
                              const BootstrapOptions& opts) {
  if (opts.replicates < 2)
    throw Error(ErrorKind::InvalidInput, "bootstrap needs B >= 2");
  if (!(opts.level > 0.0 && opts.level < 1.0))
    throw Error(ErrorKind::InvalidInput, "level must lie in (0, 1)");

  BootstrapResult res;
  res.fit = fit_drm(rc, lbrc, basis, opts.em);
  res.B = opts.replicates;
  res.level = opts.level;
  res.band_points = res.fit.grid;
  res.fitted = res.fit.reference_curve().survival_at(res.band_points);

  const DrmStart start{res.fit.grid, res.fit.p, res.fit.params.theta};
  const auto B = static_cast<std::size_t>(opts.replicates);
  std::vector<Replicate> reps(B);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t b = next++; b < B; b = next++) {
      Rng rng(stream_seed(opts.seed, b));
      const ObservedSample rc_b = resample(rc, rng);
      const ObservedSample lb_b = resample(lbrc, rng);
      try {
        const DrmFit f = fit_drm(rc_b, lb_b, basis, opts.em, &start);
        reps[b].theta = f.params.theta;
        reps[b].survival = f.reference_curve().survival_at(res.band_points);
        reps[b].ok = true;
      } catch (const Error&) {
        reps[b].ok = false;
      }
    }
  };
  const int n_threads = std::min<int>(resolve_threads(opts.threads),
                                      static_cast<int>(B));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<const Replicate*> good;
  for (const auto& r : reps) {
    if (r.ok)
      good.push_back(&r);
    else
      ++res.failures;
  }
  if (good.empty())
    throw Error(ErrorKind::AllResamplesFailed, "every bootstrap fit failed");

  const double lo_p = (1.0 - opts.level) / 2.0;
  const double hi_p = 1.0 - lo_p;
  const Eigen::Index d = res.fit.params.theta.size();
  for (Eigen::Index c = 0; c < d; ++c) {
    std::vector<double> vals;
    for (const auto* r : good) vals.push_back(r->theta(c));
    res.theta_ci.push_back({percentile(vals, lo_p), percentile(vals, hi_p)});
  }
  for (const auto* r : good) res.theta_replicates.push_back(r->theta);

  const Eigen::Index k = res.band_points.size();
  res.band_lower.resize(k);
  res.band_upper.resize(k);
  std::vector<double> vals(good.size());
  for (Eigen::Index j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < good.size(); ++i) vals[i] = good[i]->survival(j);
    res.band_lower(j) = percentile(vals, lo_p);
    res.band_upper(j) = percentile(vals, hi_p);
  }
  res.monotone_lower = res.band_lower;
  res.monotone_upper = res.band_upper;
  for (Eigen::Index j = 1; j < k; ++j)
    res.monotone_lower(j) = std::min(res.monotone_lower(j), res.monotone_lower(j - 1));
  for (Eigen::Index j = k - 2; j >= 0; --j)
    res.monotone_upper(j) = std::max(res.monotone_upper(j), res.monotone_upper(j + 1));
  return res;
}

}  // namespace drmsurv
