#include <doctest.h>

#include <random>

#include "drmsurv/classic.hpp"

using namespace drmsurv;
using Eigen::VectorXd;

TEST_CASE("ecdf counts ties") {
  const auto c = fit_ecdf(ObservedSample::complete({1, 1, 2}));
  REQUIRE(c.points().size() == 2);
  CHECK(c.masses()(0) == doctest::Approx(2.0 / 3.0));
  CHECK(c.masses()(1) == doctest::Approx(1.0 / 3.0));
  CHECK(fit_ecdf(ObservedSample::complete({5})).masses()(0) == 1.0);
  const auto q = fit_ecdf(ObservedSample::complete({1, 2, 3, 4}));
  for (Eigen::Index j = 0; j < 4; ++j) CHECK(q.masses()(j) == 0.25);
}

TEST_CASE("Kaplan-Meier by hand") {
  const auto c = fit_km(ObservedSample::right_censored({1, 2, 3}, {1, 0, 1}));
  CHECK(c.survival(1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(c.survival(3.0) == doctest::Approx(0.0));

  const auto d = fit_km(ObservedSample::right_censored({1, 2}, {1, 0}));
  CHECK(d.survival(1.0) == doctest::Approx(0.5));
  CHECK(d.survival(1e9) == doctest::Approx(0.5));
  CHECK(d.total_mass() == doctest::Approx(0.5));
}

TEST_CASE("Kaplan-Meier without censoring is the ecdf") {
  const auto km = fit_km(ObservedSample::right_censored({1, 2}, {1, 1}));
  const auto e = fit_ecdf(ObservedSample::complete({1, 2}));
  CHECK(km.points() == e.points());
  CHECK((km.masses() - e.masses()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Kaplan-Meier with all censored fails") {
  CHECK_THROWS_AS(fit_km(ObservedSample::right_censored({1, 2}, {0, 0})), Error);
}

TEST_CASE("LTRC Kaplan-Meier with delayed entry") {
  const auto lt = ObservedSample({2, 3}, {1, 1}, Scheme::LTRC, std::vector<double>{0.5, 1});
  const auto c = fit_km_ltrc(lt);
  CHECK(c.survival(2.0) == doctest::Approx(0.5));
  CHECK(c.survival(3.0) == doctest::Approx(0.0));

  // the second subject is not yet at risk at t = 2
  const auto late = ObservedSample({2, 4}, {1, 1}, Scheme::LTRC, std::vector<double>{1, 3});
  CHECK(fit_km_ltrc(late).survival(2.0) == doctest::Approx(0.0));
}

TEST_CASE("LTRC Kaplan-Meier with zero entries is Kaplan-Meier") {
  std::mt19937_64 rng(7);
  std::exponential_distribution<double> ex(1.0);
  std::bernoulli_distribution cens(0.3);
  std::vector<double> t, a;
  std::vector<int> d;
  for (int i = 0; i < 40; ++i) {
    t.push_back(ex(rng) + 1e-3);
    d.push_back(cens(rng) ? 0 : 1);
    a.push_back(0.0);
  }
  d[0] = 1;
  const auto km = fit_km(ObservedSample::right_censored(t, d));
  const auto lt = fit_km_ltrc(ObservedSample(t, d, Scheme::LTRC, a));
  REQUIRE(km.points().size() == lt.points().size());
  CHECK((km.masses() - lt.masses()).cwiseAbs().maxCoeff() < 1e-12);
}
