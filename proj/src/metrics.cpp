#include "drmsurv/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace drmsurv {

EvalGrid make_eval_grid(const TrueDistSpec& dist, int n_points) {
  if (n_points < 2)
    throw Error(ErrorKind::InvalidInput, "evaluation grid needs >= 2 points");
  const double lo = dist.quantile(0.005);
  const double hi = dist.quantile(0.995);
  EvalGrid grid;
  grid.points = Eigen::VectorXd::LinSpaced(n_points, lo, hi);
  // LinSpaced can round the last point; pin both ends.
  grid.points(0) = lo;
  grid.points(n_points - 1) = hi;
  return grid;
}

double ks_distance(const SurvivalCurve& curve, const TrueDistSpec& truth,
                   const EvalGrid& grid) {
  const Eigen::VectorXd s = curve.survival_at(grid.points);
  double ks = 0.0;
  for (Eigen::Index i = 0; i < grid.points.size(); ++i) {
    const double f_hat = 1.0 - s(i);
    ks = std::max(ks, std::abs(f_hat - truth.cdf(grid.points(i))));
  }
  return std::min(ks, 1.0);
}

}  // namespace drmsurv
