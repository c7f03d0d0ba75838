#include <doctest.h>

#include <cmath>

#include "drmsurv/core.hpp"

using namespace drmsurv;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidInput;
}

}  // namespace

TEST_CASE("sample validation") {
  CHECK(kind_of([] { ObservedSample::right_censored({1.0, 2.0}, {1}); }) ==
        ErrorKind::InvalidInput);
  CHECK(kind_of([] { ObservedSample::right_censored({1.0, -2.0}, {1, 1}); }) ==
        ErrorKind::InvalidInput);
  CHECK(kind_of([] { ObservedSample::right_censored({1.0}, {2}); }) ==
        ErrorKind::InvalidInput);
  // entry must precede the observed time
  CHECK(kind_of([] { ObservedSample::length_biased({2.0}, {2.0}, {1}); }) ==
        ErrorKind::InvalidInput);
  CHECK(kind_of([] { ObservedSample({1.0}, {1}, Scheme::LBRC); }) ==
        ErrorKind::InvalidInput);
  CHECK(kind_of([] { ObservedSample({1.0}, {0}, Scheme::IID); }) ==
        ErrorKind::InvalidInput);

  const auto s = ObservedSample::right_censored({1, 2, 3, 4}, {1, 0, 1, 0});
  CHECK(s.size() == 4);
  CHECK(s.n_events() == 2);
  CHECK(s.censored_fraction() == doctest::Approx(0.5));
}

TEST_CASE("time grid: union of RC events and all LBRC times") {
  const auto rc = ObservedSample::right_censored({1, 2}, {1, 0});
  const auto lb = ObservedSample::length_biased({0.5, 0.5}, {2, 3}, {1, 0});
  const TimeGrid g = build_time_grid(&rc, &lb);
  CHECK(g.points == vec({1, 2, 3}));
  CHECK(g.rc_events == Eigen::Vector3i(1, 0, 0));
  CHECK(g.lb_events == Eigen::Vector3i(0, 1, 0));
  CHECK(g.lb_censored == Eigen::Vector3i(0, 0, 1));
}

TEST_CASE("time grid: RC only keeps unique event times") {
  const auto rc = ObservedSample::right_censored({1, 1, 4}, {1, 1, 0});
  const TimeGrid g = build_time_grid(&rc, nullptr);
  REQUIRE(g.size() == 1);
  CHECK(g.points(0) == 1.0);
  CHECK(g.rc_events(0) == 2);
}

TEST_CASE("time grid: LBRC only") {
  const auto lb = ObservedSample::length_biased({0.1, 0.1}, {1, 2}, {1, 1});
  const TimeGrid g = build_time_grid(nullptr, &lb);
  CHECK(g.points == vec({1, 2}));
  CHECK(g.lb_events == Eigen::Vector2i(1, 1));
}

TEST_CASE("time grid: no support points") {
  const auto rc = ObservedSample::right_censored({1, 2}, {0, 0});
  CHECK(kind_of([&] { build_time_grid(&rc, nullptr); }) ==
        ErrorKind::NoSupportPoints);
}

TEST_CASE("find_point") {
  const VectorXd pts = vec({1, 2.5, 4});
  CHECK(find_point(pts, 2.5) == 1);
  CHECK(find_point(pts, 3.0) == -1);
}

TEST_CASE("survival curve evaluation") {
  const SurvivalCurve c(vec({1, 2}), vec({0.5, 0.5}));
  CHECK(eval_survival(c, 0.0) == 1.0);
  CHECK(eval_survival(c, 1.0) == 0.5);
  CHECK(eval_survival(c, 2.5) == 0.0);
  const VectorXd xs = vec({0.0, 1.0, 1.5, 2.0, 9.0});
  const VectorXd s = c.survival_at(xs);
  for (Eigen::Index i = 0; i < xs.size(); ++i) CHECK(s(i) == c.survival(xs(i)));

  const SurvivalCurve defective(vec({1}), vec({0.5}));
  CHECK(defective.survival(100.0) == 0.5);
  CHECK(defective.total_mass() == 0.5);
}

TEST_CASE("quantile is the generalized inverse") {
  CHECK(quantile(SurvivalCurve(vec({1, 2}), vec({0.5, 0.5})), 0.5) == 1.0);
  CHECK(quantile(SurvivalCurve(vec({1, 3}), vec({0.25, 0.75})), 0.5) == 3.0);
  CHECK(quantile(SurvivalCurve(vec({7}), vec({1.0})), 0.75) == 7.0);
  CHECK(kind_of([] { quantile(SurvivalCurve(vec({1}), vec({0.5})), 0.75); }) ==
        ErrorKind::QuantileBeyondSupport);
}

TEST_CASE("discrete distribution must sum to one") {
  CHECK(kind_of([] { DiscreteDistribution(vec({1, 2}), vec({0.5, 0.4})); }) ==
        ErrorKind::InvalidInput);
  CHECK_NOTHROW(DiscreteDistribution(vec({1, 2}), vec({0.5, 0.5})));
}

TEST_CASE("basis evaluation") {
  CHECK(eval_basis(BasisSpec::log(), 1.0)(0) == 0.0);
  const VectorXd v = eval_basis(BasisSpec::parse({"x", "log"}), std::exp(1.0));
  CHECK(v(0) == doctest::Approx(std::exp(1.0)));
  CHECK(v(1) == doctest::Approx(1.0));
  CHECK(eval_basis(BasisSpec::parse({"sqrt"}), 4.0)(0) == 2.0);
  CHECK(eval_basis(BasisSpec::parse({"x2"}), 3.0)(0) == 9.0);
  CHECK(kind_of([] { eval_basis(BasisSpec::log(), 0.0); }) == ErrorKind::DomainError);
  CHECK(kind_of([] { BasisSpec::parse({"cubic"}); }) == ErrorKind::InvalidInput);

  const auto tab = BasisComponent::tabulated({1.0, 3.0}, {0.0, 2.0});
  const BasisSpec spec({tab});
  CHECK(eval_basis(spec, 2.0)(0) == doctest::Approx(1.0));
  CHECK(eval_basis(spec, 10.0)(0) == doctest::Approx(2.0));

  const Eigen::MatrixXd h = basis_matrix(BasisSpec::parse({"log", "x"}), vec({1, 2}));
  CHECK(h.rows() == 2);
  CHECK(h.cols() == 2);
  CHECK(h(1, 0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("normalizing alpha and tilt") {
  const VectorXd p = vec({0.2, 0.3, 0.5});
  const Eigen::MatrixXd h = basis_matrix(BasisSpec::log(), vec({1, 2, 4}));
  VectorXd theta(1);
  theta << 1.0;
  const double alpha = normalizing_alpha(p, h, theta);
  // sum p_j t_j = 0.2 + 0.6 + 2.0
  CHECK(alpha == doctest::Approx(-std::log(2.8)));
  const VectorXd q = tilt(p, h, DrmParams{alpha, theta});
  CHECK(q.sum() == doctest::Approx(1.0));
  CHECK(q(2) == doctest::Approx(2.0 / 2.8));

  // large theta stays finite
  theta << 300.0;
  const double big = normalizing_alpha(p, h, theta);
  CHECK(std::isfinite(big));
  CHECK(tilt(p, h, DrmParams{big, theta}).sum() == doctest::Approx(1.0));
}
