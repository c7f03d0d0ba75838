#ifndef DRMSURV_BOOTSTRAP_HPP_
#define DRMSURV_BOOTSTRAP_HPP_

#include <cstdint>
#include <vector>

#include "drmsurv/em.hpp"

namespace drmsurv {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x) const { return lower <= x && x <= upper; }
};

struct BootstrapOptions {
  int replicates = 150;
  double level = 0.95;
  std::uint64_t seed = 1;
  EmOptions em;
  int threads = 0;
};

/// Percentile bootstrap for the two-sample DRM fit. Bands are evaluated at
/// the support points of the fit to the original data.
struct BootstrapResult {
  DrmFit fit;                         // fit to the original samples
  std::vector<Interval> theta_ci;     // one per basis component
  Eigen::VectorXd band_points;
  Eigen::VectorXd fitted;             // reference survival of `fit`
  Eigen::VectorXd band_lower;         // raw pointwise percentiles
  Eigen::VectorXd band_upper;
  Eigen::VectorXd monotone_lower;     // running minimum of band_lower
  Eigen::VectorXd monotone_upper;     // running maximum of band_upper from the right
  std::vector<Eigen::VectorXd> theta_replicates;  // successful resamples only
  int B = 0;
  double level = 0.95;
  int failures = 0;

  /// True when 0 lies outside the interval of every theta component.
  bool zero_outside_theta_ci() const;
};

BootstrapResult bootstrap_drm(const ObservedSample& rc,
                              const ObservedSample& lbrc,
                              const BasisSpec& basis,
                              const BootstrapOptions& opts = {});

/// Linear-interpolation (type 7) empirical quantile of unsorted values.
double percentile(std::vector<double> values, double prob);

/// Resample `sample` with replacement, keeping its size and scheme.
template <class Rng>
ObservedSample resample(const ObservedSample& sample, Rng& rng);

}  // namespace drmsurv

#include <random>

namespace drmsurv {

template <class Rng>
ObservedSample resample(const ObservedSample& sample, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
  std::vector<double> times(sample.size());
  std::vector<int> status(sample.size());
  std::vector<double> entries;
  if (sample.entries()) entries.resize(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const std::size_t j = pick(rng);
    times[i] = sample.times()[j];
    status[i] = sample.status()[j];
    if (sample.entries()) entries[i] = (*sample.entries())[j];
  }
  if (sample.entries())
    return ObservedSample(std::move(times), std::move(status), sample.scheme(),
                          std::move(entries));
  return ObservedSample(std::move(times), std::move(status), sample.scheme());
}

}  // namespace drmsurv

#endif  // DRMSURV_BOOTSTRAP_HPP_
