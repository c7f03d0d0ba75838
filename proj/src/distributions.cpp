#include "drmsurv/distributions.hpp"

#include <boost/math/distributions/gamma.hpp>

#include <cmath>
#include <sstream>

#include "drmsurv/core.hpp"

namespace drmsurv {

TrueDistSpec TrueDistSpec::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) ||
      !std::isfinite(scale))
    throw Error(ErrorKind::InvalidInput,
                "gamma shape and scale must be positive and finite");
  return TrueDistSpec{Family::Gamma, shape, scale};
}

TrueDistSpec TrueDistSpec::exponential(double mean) {
  TrueDistSpec d = gamma(1.0, mean);
  d.family = Family::Exponential;
  return d;
}

double TrueDistSpec::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (!std::isfinite(x)) return 1.0;
  return boost::math::cdf(boost::math::gamma_distribution<>(shape, scale), x);
}

double TrueDistSpec::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorKind::InvalidInput, "quantile level must lie in (0, 1)");
  return boost::math::quantile(boost::math::gamma_distribution<>(shape, scale),
                               p);
}

double TrueDistSpec::truncated_mean(double c) const {
  if (c <= 0.0) return 0.0;
  // E[T; T <= c] = mean * F_{shape+1}(c), plus c * P(T > c).
  const boost::math::gamma_distribution<> upper(shape + 1.0, scale);
  return mean() * boost::math::cdf(upper, c) + c * survival(c);
}

std::string TrueDistSpec::describe() const {
  std::ostringstream os;
  if (family == Family::Exponential)
    os << "Exponential(mean " << scale << ")";
  else
    os << "Gamma(shape " << shape << ", scale " << scale << ")";
  return os.str();
}

}  // namespace drmsurv
