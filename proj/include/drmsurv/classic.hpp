#ifndef DRMSURV_CLASSIC_HPP_
#define DRMSURV_CLASSIC_HPP_

#include "drmsurv/core.hpp"

namespace drmsurv {

/// Empirical distribution of complete data: mass r_j / n at each unique time.
SurvivalCurve fit_ecdf(const ObservedSample& sample);

/// Kaplan-Meier product-limit estimator for right-censored data.
///
/// Risk set at t_j is {i : X_i >= t_j}; an event and a censoring tied at t_j
/// both count as at risk (events precede censorings). Jumps sit at event
/// times only. When the largest observation is censored the curve is
/// defective and the missing mass is left where it is.
SurvivalCurve fit_km(const ObservedSample& sample);

/// Product-limit estimator with truncation-adjusted risk sets
/// {i : A_i < t_j <= X_i}. Treats LBRC data as generic LTRC data.
SurvivalCurve fit_km_ltrc(const ObservedSample& sample);

}  // namespace drmsurv

#endif  // DRMSURV_CLASSIC_HPP_
