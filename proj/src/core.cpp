#include "drmsurv/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace drmsurv {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::IID: return "IID";
    case Scheme::RC: return "RC";
    case Scheme::LTRC: return "LTRC";
    case Scheme::LBRC: return "LBRC";
  }
  return "?";
}

namespace {

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorKind::InvalidInput, msg);
}

bool needs_entries(Scheme scheme) {
  return scheme == Scheme::LTRC || scheme == Scheme::LBRC;
}

}  // namespace

ObservedSample::ObservedSample(std::vector<double> times,
                               std::vector<int> status, Scheme scheme,
                               std::optional<std::vector<double>> entries)
    : times_(std::move(times)),
      status_(std::move(status)),
      entries_(std::move(entries)),
      scheme_(scheme) {
  if (times_.empty()) invalid("sample has no observations");
  if (status_.size() != times_.size())
    invalid("times and status differ in length");
  if (needs_entries(scheme_) != entries_.has_value()) {
    invalid(std::string("entry times are ") +
            (needs_entries(scheme_) ? "required" : "not allowed") +
            " for scheme " + std::string(to_string(scheme_)));
  }
  if (entries_ && entries_->size() != times_.size())
    invalid("entries and times differ in length");

  for (std::size_t i = 0; i < times_.size(); ++i) {
    const double t = times_[i];
    if (!std::isfinite(t) || t <= 0.0) {
      std::ostringstream os;
      os << "observation " << i << ": time must be positive and finite, got "
         << t;
      invalid(os.str());
    }
    if (status_[i] != 0 && status_[i] != 1) {
      std::ostringstream os;
      os << "observation " << i << ": status must be 0 or 1";
      invalid(os.str());
    }
    if (scheme_ == Scheme::IID && status_[i] != 1)
      invalid("IID samples cannot contain censored observations");
    if (entries_) {
      const double a = (*entries_)[i];
      if (!std::isfinite(a) || a < 0.0 || a >= t) {
        std::ostringstream os;
        os << "observation " << i
           << ": entry must satisfy 0 <= entry < time, got entry " << a
           << " and time " << t;
        invalid(os.str());
      }
    }
  }
}

ObservedSample ObservedSample::complete(std::vector<double> times) {
  std::vector<int> status(times.size(), 1);
  return ObservedSample(std::move(times), std::move(status), Scheme::IID);
}

ObservedSample ObservedSample::right_censored(std::vector<double> times,
                                              std::vector<int> status) {
  return ObservedSample(std::move(times), std::move(status), Scheme::RC);
}

ObservedSample ObservedSample::length_biased(std::vector<double> entries,
                                             std::vector<double> times,
                                             std::vector<int> status) {
  return ObservedSample(std::move(times), std::move(status), Scheme::LBRC,
                        std::move(entries));
}

std::size_t ObservedSample::n_events() const noexcept {
  return static_cast<std::size_t>(
      std::count(status_.begin(), status_.end(), 1));
}

double ObservedSample::censored_fraction() const noexcept {
  return 1.0 - static_cast<double>(n_events()) /
                   static_cast<double>(times_.size());
}

ObservedSample ObservedSample::with_scheme(Scheme scheme) const {
  if (needs_entries(scheme) == needs_entries(scheme_))
    return ObservedSample(times_, status_, scheme, entries_);
  if (!needs_entries(scheme)) {
    // Dropping truncation information is only meaningful for RC analysis.
    return ObservedSample(times_, status_, scheme);
  }
  invalid("cannot add entry times to a sample without them");
}

TimeGrid build_time_grid(const ObservedSample* rc, const ObservedSample* lbrc) {
  if (rc && rc->scheme() != Scheme::RC && rc->scheme() != Scheme::IID)
    invalid("RC slot holds a " + std::string(to_string(rc->scheme())) +
            " sample");
  if (lbrc && lbrc->scheme() != Scheme::LBRC)
    invalid("LBRC slot holds a " + std::string(to_string(lbrc->scheme())) +
            " sample");

  std::vector<double> pts;
  if (rc) {
    for (std::size_t i = 0; i < rc->size(); ++i)
      if (rc->status()[i] == 1) pts.push_back(rc->times()[i]);
  }
  if (lbrc) pts.insert(pts.end(), lbrc->times().begin(), lbrc->times().end());
  if (pts.empty())
    throw Error(ErrorKind::NoSupportPoints,
                "no support points: no RC events and no LBRC observations");

  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  TimeGrid grid;
  const auto k = static_cast<Eigen::Index>(pts.size());
  grid.points = Eigen::Map<const Eigen::VectorXd>(pts.data(), k);
  grid.rc_events = Eigen::VectorXi::Zero(k);
  grid.rc_censored = Eigen::VectorXi::Zero(k);
  grid.lb_events = Eigen::VectorXi::Zero(k);
  grid.lb_censored = Eigen::VectorXi::Zero(k);

  if (rc) {
    for (std::size_t i = 0; i < rc->size(); ++i) {
      const Eigen::Index j = find_point(grid.points, rc->times()[i]);
      if (j < 0) continue;
      if (rc->status()[i] == 1)
        ++grid.rc_events(j);
      else
        ++grid.rc_censored(j);
    }
  }
  if (lbrc) {
    for (std::size_t i = 0; i < lbrc->size(); ++i) {
      const Eigen::Index j = find_point(grid.points, lbrc->times()[i]);
      if (lbrc->status()[i] == 1)
        ++grid.lb_events(j);
      else
        ++grid.lb_censored(j);
    }
  }
  return grid;
}

Eigen::Index find_point(const Eigen::VectorXd& points, double x) {
  const double* first = points.data();
  const double* last = first + points.size();
  const double* it = std::lower_bound(first, last, x);
  if (it == last || *it != x) return -1;
  return static_cast<Eigen::Index>(it - first);
}

DiscreteDistribution::DiscreteDistribution(Eigen::VectorXd points_,
                                           Eigen::VectorXd masses_)
    : points(std::move(points_)), masses(std::move(masses_)) {
  if (points.size() == 0 || points.size() != masses.size())
    invalid("distribution needs equal-length nonempty points and masses");
  if ((masses.array() < 0.0).any()) invalid("negative probability mass");
  if (std::abs(masses.sum() - 1.0) > 1e-10)
    invalid("probability masses do not sum to one");
}

SurvivalCurve::SurvivalCurve(Eigen::VectorXd points, Eigen::VectorXd masses)
    : points_(std::move(points)), masses_(std::move(masses)) {
  if (points_.size() == 0 || points_.size() != masses_.size())
    invalid("survival curve needs equal-length nonempty points and masses");
  for (Eigen::Index j = 1; j < points_.size(); ++j)
    if (!(points_(j) > points_(j - 1)))
      invalid("survival curve points must be strictly increasing");
  if ((masses_.array() < 0.0).any()) invalid("negative jump mass");
  cumulative_.resize(masses_.size());
  double acc = 0.0;
  for (Eigen::Index j = 0; j < masses_.size(); ++j) {
    acc += masses_(j);
    cumulative_(j) = acc;
  }
  if (acc > 1.0 + 1e-8) invalid("jump masses exceed one");
}

double SurvivalCurve::total_mass() const noexcept {
  return cumulative_(cumulative_.size() - 1);
}

double SurvivalCurve::survival(double x) const {
  const double* first = points_.data();
  const double* it = std::upper_bound(first, first + points_.size(), x);
  if (it == first) return 1.0;
  const double s = 1.0 - cumulative_(static_cast<Eigen::Index>(it - first) - 1);
  return std::clamp(s, 0.0, 1.0);
}

Eigen::VectorXd SurvivalCurve::survival_at(const Eigen::VectorXd& xs) const {
  Eigen::VectorXd out(xs.size());
  Eigen::Index j = 0;
  double cum = 0.0;
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    if (i > 0 && xs(i) < xs(i - 1)) {
      out(i) = survival(xs(i));
      continue;
    }
    while (j < points_.size() && points_(j) <= xs(i)) {
      cum = cumulative_(j);
      ++j;
    }
    out(i) = std::clamp(1.0 - cum, 0.0, 1.0);
  }
  return out;
}

double eval_survival(const SurvivalCurve& curve, double x) {
  return curve.survival(x);
}

double quantile(const SurvivalCurve& curve, double q) {
  if (!(q > 0.0 && q < 1.0)) invalid("quantile level must lie in (0, 1)");
  const auto& pts = curve.points();
  const auto& m = curve.masses();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < pts.size(); ++j) {
    acc += m(j);
    if (acc >= q - 1e-12) return pts(j);
  }
  std::ostringstream os;
  os << "quantile beyond support: level " << q << " exceeds total mass "
     << acc;
  throw Error(ErrorKind::QuantileBeyondSupport, os.str());
}

BasisComponent BasisComponent::tabulated(std::vector<double> knots,
                                         std::vector<double> values) {
  if (knots.empty() || knots.size() != values.size())
    invalid("tabulated basis needs equal-length nonempty knots and values");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1]))
      invalid("tabulated basis knots must be strictly increasing");
  for (double v : values)
    if (!std::isfinite(v)) invalid("tabulated basis values must be finite");
  BasisComponent c;
  c.kind = BasisKind::Tabulated;
  c.knots = std::move(knots);
  c.values = std::move(values);
  return c;
}

BasisSpec::BasisSpec(std::vector<BasisComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) invalid("basis needs at least one component");
}

BasisSpec BasisSpec::parse(const std::vector<std::string>& names) {
  std::vector<BasisComponent> comps;
  for (const auto& name : names) {
    BasisComponent c;
    if (name == "log")
      c.kind = BasisKind::Log;
    else if (name == "sqrt")
      c.kind = BasisKind::Sqrt;
    else if (name == "x")
      c.kind = BasisKind::Identity;
    else if (name == "x2")
      c.kind = BasisKind::Square;
    else
      invalid("unknown basis function '" + name +
              "' (expected log, sqrt, x or x2)");
    comps.push_back(std::move(c));
  }
  return BasisSpec(std::move(comps));
}

std::vector<std::string> BasisSpec::names() const {
  std::vector<std::string> out;
  for (const auto& c : components_) {
    switch (c.kind) {
      case BasisKind::Log: out.emplace_back("log"); break;
      case BasisKind::Sqrt: out.emplace_back("sqrt"); break;
      case BasisKind::Identity: out.emplace_back("x"); break;
      case BasisKind::Square: out.emplace_back("x2"); break;
      case BasisKind::Tabulated: out.emplace_back("tabulated"); break;
    }
  }
  return out;
}

namespace {

double eval_component(const BasisComponent& c, double x) {
  switch (c.kind) {
    case BasisKind::Log:
      if (!(x > 0.0))
        throw Error(ErrorKind::DomainError, "log basis needs x > 0");
      return std::log(x);
    case BasisKind::Sqrt:
      if (!(x > 0.0))
        throw Error(ErrorKind::DomainError, "sqrt basis needs x > 0");
      return std::sqrt(x);
    case BasisKind::Identity: return x;
    case BasisKind::Square: return x * x;
    case BasisKind::Tabulated: {
      if (x <= c.knots.front()) return c.values.front();
      if (x >= c.knots.back()) return c.values.back();
      const auto it = std::upper_bound(c.knots.begin(), c.knots.end(), x);
      const auto i = static_cast<std::size_t>(it - c.knots.begin());
      const double w = (x - c.knots[i - 1]) / (c.knots[i] - c.knots[i - 1]);
      return (1.0 - w) * c.values[i - 1] + w * c.values[i];
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

Eigen::VectorXd eval_basis(const BasisSpec& spec, double x) {
  Eigen::VectorXd h(spec.dimension());
  for (Eigen::Index i = 0; i < spec.dimension(); ++i) {
    h(i) = eval_component(spec.components()[static_cast<std::size_t>(i)], x);
    if (!std::isfinite(h(i)))
      throw Error(ErrorKind::DomainError, "basis value is not finite");
  }
  return h;
}

Eigen::MatrixXd basis_matrix(const BasisSpec& spec,
                             const Eigen::VectorXd& points) {
  Eigen::MatrixXd h(points.size(), spec.dimension());
  for (Eigen::Index j = 0; j < points.size(); ++j)
    h.row(j) = eval_basis(spec, points(j)).transpose();
  return h;
}

double normalizing_alpha(const Eigen::VectorXd& p, const Eigen::MatrixXd& h,
                         const Eigen::VectorXd& theta) {
  const Eigen::VectorXd u = h * theta;
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < p.size(); ++j)
    if (p(j) > 0.0) top = std::max(top, std::log(p(j)) + u(j));
  double acc = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j)
    if (p(j) > 0.0) acc += std::exp(std::log(p(j)) + u(j) - top);
  return -(top + std::log(acc));
}

Eigen::VectorXd tilt(const Eigen::VectorXd& p, const Eigen::MatrixXd& h,
                     const DrmParams& params) {
  const Eigen::ArrayXd u =
      (h * params.theta).array() + params.alpha;
  return (p.array() * u.exp()).matrix();
}

}  // namespace drmsurv
