#ifndef DRMSURV_CORE_HPP_
#define DRMSURV_CORE_HPP_

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace drmsurv {

enum class ErrorKind {
  InvalidInput,
  NoSupportPoints,
  QuantileBeyondSupport,
  DomainError,
  NoEvents,
  NonidentifiableRiskSet,
  SupportViolation,
  TiltUnbounded,
  CalibrationFailed,
  TauTooLarge,
  AllResamplesFailed,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// How a sample was collected.
///   IID  - complete observations
///   RC   - right-censored, X = min(T, C)
///   LTRC - left-truncated (T > A observed only), right-censored
///   LBRC - LTRC with uniform truncation; censoring acts on the residual T - A
enum class Scheme { IID, RC, LTRC, LBRC };

std::string_view to_string(Scheme scheme);

/// One arm of survival data. Validated on construction and immutable after.
class ObservedSample {
 public:
  ObservedSample(std::vector<double> times, std::vector<int> status,
                 Scheme scheme,
                 std::optional<std::vector<double>> entries = std::nullopt);

  static ObservedSample complete(std::vector<double> times);
  static ObservedSample right_censored(std::vector<double> times,
                                       std::vector<int> status);
  static ObservedSample length_biased(std::vector<double> entries,
                                      std::vector<double> times,
                                      std::vector<int> status);

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<int>& status() const noexcept { return status_; }
  const std::optional<std::vector<double>>& entries() const noexcept {
    return entries_;
  }
  Scheme scheme() const noexcept { return scheme_; }
  std::size_t size() const noexcept { return times_.size(); }
  std::size_t n_events() const noexcept;
  double censored_fraction() const noexcept;

  /// Same observations relabelled with another compatible scheme.
  ObservedSample with_scheme(Scheme scheme) const;

 private:
  std::vector<double> times_;
  std::vector<int> status_;
  std::optional<std::vector<double>> entries_;
  Scheme scheme_;
};

/// Support points of a (pooled) empirical likelihood, with per-point tallies.
///
/// Points are the unique RC event times together with every LBRC time (event
/// or censored). RC censoring times do not create points; rc_censored only
/// counts RC censorings that land exactly on a point.
struct TimeGrid {
  Eigen::VectorXd points;
  Eigen::VectorXi rc_events;
  Eigen::VectorXi rc_censored;
  Eigen::VectorXi lb_events;
  Eigen::VectorXi lb_censored;

  Eigen::Index size() const noexcept { return points.size(); }
  double last() const { return points(points.size() - 1); }
};

TimeGrid build_time_grid(const ObservedSample* rc, const ObservedSample* lbrc);

/// Index of `x` in the strictly increasing `points`, or -1 when absent.
Eigen::Index find_point(const Eigen::VectorXd& points, double x);

/// Probability masses on support points; sums to one.
struct DiscreteDistribution {
  Eigen::VectorXd points;
  Eigen::VectorXd masses;

  DiscreteDistribution(Eigen::VectorXd points_, Eigen::VectorXd masses_);
};

/// Right-continuous step survival function built from jump masses.
///
/// S(x) = 1 - sum_{t_j <= x} mass_j. Masses may sum to less than one
/// (defective curve); the missing mass then sits beyond the last point.
class SurvivalCurve {
 public:
  SurvivalCurve(Eigen::VectorXd points, Eigen::VectorXd masses);
  explicit SurvivalCurve(const DiscreteDistribution& dist)
      : SurvivalCurve(dist.points, dist.masses) {}

  const Eigen::VectorXd& points() const noexcept { return points_; }
  const Eigen::VectorXd& masses() const noexcept { return masses_; }
  double total_mass() const noexcept;

  double survival(double x) const;
  double cdf(double x) const { return 1.0 - survival(x); }

  /// Survival evaluated at each point of an increasing vector, in one sweep.
  Eigen::VectorXd survival_at(const Eigen::VectorXd& xs) const;

 private:
  Eigen::VectorXd points_;
  Eigen::VectorXd masses_;
  Eigen::VectorXd cumulative_;
};

double eval_survival(const SurvivalCurve& curve, double x);

/// Generalized inverse: smallest support point whose cumulative mass >= q.
double quantile(const SurvivalCurve& curve, double q);

enum class BasisKind { Log, Sqrt, Identity, Square, Tabulated };

struct BasisComponent {
  BasisKind kind = BasisKind::Log;
  // Knots and values for Tabulated; linear between knots, flat outside.
  std::vector<double> knots;
  std::vector<double> values;

  static BasisComponent tabulated(std::vector<double> knots,
                                  std::vector<double> values);
};

/// Ordered list of basis functions h(x) = (h_1(x), ..., h_d(x)).
class BasisSpec {
 public:
  BasisSpec() = default;
  explicit BasisSpec(std::vector<BasisComponent> components);

  /// Parses names like "log", "sqrt", "x", "x2".
  static BasisSpec parse(const std::vector<std::string>& names);
  static BasisSpec log() { return parse({"log"}); }

  Eigen::Index dimension() const noexcept {
    return static_cast<Eigen::Index>(components_.size());
  }
  const std::vector<BasisComponent>& components() const noexcept {
    return components_;
  }
  std::vector<std::string> names() const;

 private:
  std::vector<BasisComponent> components_;
};

Eigen::VectorXd eval_basis(const BasisSpec& spec, double x);

/// k x d matrix with row j = h(points_j).
Eigen::MatrixXd basis_matrix(const BasisSpec& spec,
                             const Eigen::VectorXd& points);

/// Tilt parameters: dF(x) = exp(alpha + theta' h(x)) dF0(x).
struct DrmParams {
  double alpha = 0.0;
  Eigen::VectorXd theta;
};

/// Normalizing constant for `theta` against reference masses `p`.
double normalizing_alpha(const Eigen::VectorXd& p, const Eigen::MatrixXd& h,
                         const Eigen::VectorXd& theta);

/// q_j = p_j exp(alpha + theta' h(t_j)).
Eigen::VectorXd tilt(const Eigen::VectorXd& p, const Eigen::MatrixXd& h,
                     const DrmParams& params);

}  // namespace drmsurv

#endif  // DRMSURV_CORE_HPP_
