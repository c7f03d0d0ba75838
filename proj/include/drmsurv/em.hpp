#ifndef DRMSURV_EM_HPP_
#define DRMSURV_EM_HPP_

#include <vector>

#include "drmsurv/core.hpp"

namespace drmsurv {

struct EmOptions {
  int max_iters = 5000;
  /// Stop once max(|dp|_inf, |dtheta|_inf, |dalpha|) falls below this.
  double tol = 1e-8;
  /// M-step stopping rule: |gradient|_inf <= inner_tol * total weight.
  double inner_tol = 1e-10;
  int inner_max_iters = 100;
  /// Hold every tilt at (alpha, theta) = (0, 0): the common-distribution NPMLE.
  bool theta_fixed_at_zero = false;
  double theta_bound = 50.0;
  /// Squared extrapolation between EM steps (likelihood-safeguarded).
  bool accelerate = true;
};

/// Two-sample density ratio fit: RC arm from F0, LBRC arm from the tilted law.
struct DrmFit {
  DrmParams params;
  Eigen::VectorXd grid;
  Eigen::VectorXd p;  // reference masses
  Eigen::VectorXd q;  // tilted masses p_j exp(alpha + theta' h(t_j))
  /// Acceptance probability sum_j q_j t_j / t_k of the length-biased arm.
  double pi_hat = 1.0;
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;

  SurvivalCurve reference_curve() const { return SurvivalCurve(grid, p); }
  SurvivalCurve tilted_curve() const { return SurvivalCurve(grid, q); }
  double loglik() const { return loglik_trace.back(); }
};

/// K-sample fit: one reference arm and K-1 tilted arms sharing F0 and h.
struct MultiDrmFit {
  std::vector<DrmParams> params;  // one per tilted arm
  Eigen::VectorXd grid;
  Eigen::VectorXd p;
  std::vector<Eigen::VectorXd> q;  // one per tilted arm
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;

  SurvivalCurve reference_curve() const { return SurvivalCurve(grid, p); }
  SurvivalCurve tilted_curve(std::size_t arm) const {
    return SurvivalCurve(grid, q.at(arm));
  }
};

struct KmEmFit {
  SurvivalCurve curve;
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;
};

/// Self-consistency EM for right-censored data. The fixed point is the
/// Kaplan-Meier estimate, including its defective tail.
KmEmFit fit_km_em(const ObservedSample& rc, const EmOptions& opts = {});

/// NPMLE of the unbiased law from length-biased right-censored data. Support
/// is every observed time; the largest one stands in for the truncation bound.
DrmFit fit_npmle_lbrc(const ObservedSample& lbrc, const EmOptions& opts = {});

/// Density ratio model EM for a right-censored reference sample combined with
/// a length-biased sample from the exponentially tilted law.
DrmFit fit_drm(const ObservedSample& rc, const ObservedSample& lbrc,
               const BasisSpec& basis, const EmOptions& opts = {});

/// Starting point for fit_drm: masses on any points (those matching the new
/// support are reused) and a tilt.
struct DrmStart {
  Eigen::VectorXd points;
  Eigen::VectorXd masses;
  Eigen::VectorXd theta;
};

DrmFit fit_drm(const ObservedSample& rc, const ObservedSample& lbrc,
               const BasisSpec& basis, const EmOptions& opts,
               const DrmStart* start);

/// NPMLE assuming both arms share one distribution. Either arm may be null.
DrmFit fit_pooled_npmle(const ObservedSample* rc, const ObservedSample* lbrc,
                        const EmOptions& opts = {});

/// K-sample density ratio model. Arms may be RC (or IID) or LBRC.
MultiDrmFit fit_drm_multi(const ObservedSample& reference,
                          const std::vector<ObservedSample>& tilted,
                          const BasisSpec& basis, const EmOptions& opts = {});

/// Observed-data log-likelihood of reference masses `p` and tilt `params`.
/// An empty theta means no tilt (q = p). Throws SupportViolation when an
/// observation has zero probability.
double observed_loglik(const DrmParams& params, const DiscreteDistribution& p,
                       const ObservedSample* rc, const ObservedSample* lbrc,
                       const BasisSpec& basis);

/// The M-step objective with the masses profiled out.
///
/// For total expected counts W_j (all arms) and per-tilted-arm counts V_kj,
///   p_j(beta)  = W_j / (lambda_0 + sum_k lambda_k exp(u_kj)),
///   Phi(beta)  = sum_j W_j log p_j(beta) + sum_k sum_j V_kj u_kj,
/// with u_kj = alpha_k + theta_k' h(t_j), lambda_k = sum_j V_kj and
/// lambda_0 = sum_j W_j - sum_k lambda_k. Phi is concave; beta stacks
/// (alpha_k, theta_k) for each tilted arm.
class ProfileObjective {
 public:
  ProfileObjective(Eigen::VectorXd total_weights,
                   std::vector<Eigen::VectorXd> tilted_weights,
                   const Eigen::MatrixXd& h);

  Eigen::Index dimension() const noexcept { return dim_; }
  double value(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd masses(const Eigen::VectorXd& beta) const;
  double total_weight() const noexcept { return total_; }

  /// Damped Newton ascent from `beta`. Returns false if the objective
  /// became non-finite.
  bool maximize(Eigen::VectorXd& beta, double tol, int max_iters) const;

 private:
  void evaluate(const Eigen::VectorXd& beta, double* value,
                Eigen::VectorXd* grad, Eigen::MatrixXd* hess,
                Eigen::VectorXd* masses) const;

  Eigen::VectorXd w_;
  std::vector<Eigen::VectorXd> v_;
  Eigen::MatrixXd design_;  // k x (d + 1), columns (1, h)
  Eigen::VectorXd log_w_;
  double log_lambda0_;
  std::vector<double> log_lambda_;
  double cross_;  // sum_j W_j log W_j
  double total_;
  Eigen::Index dim_;
};

}  // namespace drmsurv

#endif  // DRMSURV_EM_HPP_
