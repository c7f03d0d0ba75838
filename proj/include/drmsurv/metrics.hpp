#ifndef DRMSURV_METRICS_HPP_
#define DRMSURV_METRICS_HPP_

#include <Eigen/Dense>

#include "drmsurv/core.hpp"
#include "drmsurv/distributions.hpp"

namespace drmsurv {

struct EvalGrid {
  Eigen::VectorXd points;  // strictly increasing, positive
};

/// `n_points` equally spaced points between the 0.5% and 99.5% quantiles.
EvalGrid make_eval_grid(const TrueDistSpec& dist, int n_points = 200);

/// max over the grid of |F_hat(x) - F(x)| with F_hat = 1 - S_hat.
double ks_distance(const SurvivalCurve& curve, const TrueDistSpec& truth,
                   const EvalGrid& grid);

}  // namespace drmsurv

#endif  // DRMSURV_METRICS_HPP_
