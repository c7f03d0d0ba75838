#ifndef DRMSURV_DISTRIBUTIONS_HPP_
#define DRMSURV_DISTRIBUTIONS_HPP_

#include <random>
#include <string>

namespace drmsurv {

enum class Family { Gamma, Exponential };

/// Failure-time law used as simulation truth. Exponential is gamma with
/// shape 1; `scale` is the mean of the exponential.
struct TrueDistSpec {
  Family family = Family::Gamma;
  double shape = 1.0;
  double scale = 1.0;

  static TrueDistSpec gamma(double shape, double scale);
  static TrueDistSpec exponential(double mean);

  double cdf(double x) const;
  double survival(double x) const { return 1.0 - cdf(x); }
  double quantile(double p) const;
  double mean() const { return shape * scale; }
  /// E[min(T, c)].
  double truncated_mean(double c) const;

  template <class Rng>
  double sample(Rng& rng) const {
    std::gamma_distribution<double> g(shape, scale);
    return g(rng);
  }

  std::string describe() const;
};

}  // namespace drmsurv

#endif  // DRMSURV_DISTRIBUTIONS_HPP_
