#include <doctest.h>

#include "drmsurv/bootstrap.hpp"
#include "drmsurv/simulate.hpp"

using namespace drmsurv;

TEST_CASE("type 7 percentile") {
  CHECK(percentile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(percentile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(percentile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(percentile({1, 2, 3, 4, 5}, 0.25) == 2.0);
  CHECK_THROWS_AS(percentile({}, 0.5), Error);
}

TEST_CASE("resampling keeps size and scheme") {
  const auto lb = ObservedSample::length_biased({0.1, 0.2, 0.3}, {1, 2, 3}, {1, 0, 1});
  Rng rng(1);
  const auto r = resample(lb, rng);
  CHECK(r.size() == 3);
  CHECK(r.scheme() == Scheme::LBRC);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double t = r.times()[i];
    CHECK((*r.entries())[i] == doctest::Approx(t / 10.0));
  }
}

TEST_CASE("bootstrap preconditions") {
  ScenarioConfig cfg;
  const auto data = generate_replication(cfg, 0.1, 0.05, 0);
  BootstrapOptions opts;
  opts.replicates = 1;
  CHECK_THROWS_AS(bootstrap_drm(data.rc, data.lbrc, BasisSpec::log(), opts), Error);
  opts.replicates = 10;
  opts.level = 1.0;
  CHECK_THROWS_AS(bootstrap_drm(data.rc, data.lbrc, BasisSpec::log(), opts), Error);
}

TEST_CASE("bootstrap intervals and bands") {
  ScenarioConfig cfg;
  cfg.rc_dist = TrueDistSpec::gamma(1.0, 2.0);
  cfg.lbrc_dist = TrueDistSpec::gamma(2.0, 2.0);
  cfg.n_rc = cfg.n_lbrc = 300;
  const auto data = generate_replication(cfg, 0.1, 0.05, 2);
  BootstrapOptions opts;
  opts.replicates = 40;
  opts.seed = 3;
  const BootstrapResult res = bootstrap_drm(data.rc, data.lbrc, BasisSpec::log(), opts);
  REQUIRE(res.theta_ci.size() == 1);
  CHECK(res.theta_ci[0].lower <= res.theta_ci[0].upper);
  CHECK(res.theta_ci[0].contains(res.fit.params.theta(0)));
  CHECK(res.zero_outside_theta_ci());
  CHECK(res.failures == 0);
  CHECK(res.theta_replicates.size() == 40);

  const auto k = res.band_points.size();
  CHECK(k == res.fit.grid.size());
  for (Eigen::Index j = 0; j < k; ++j) {
    CHECK(res.band_lower(j) <= res.band_upper(j));
    CHECK(res.monotone_lower(j) <= res.band_lower(j));
    CHECK(res.monotone_upper(j) >= res.band_upper(j));
    if (j > 0) {
      CHECK(res.monotone_lower(j) <= res.monotone_lower(j - 1));
      CHECK(res.monotone_upper(j) <= res.monotone_upper(j - 1));
    }
  }

  opts.threads = 2;
  const BootstrapResult again = bootstrap_drm(data.rc, data.lbrc, BasisSpec::log(), opts);
  CHECK(again.theta_ci[0].lower == res.theta_ci[0].lower);
  CHECK(again.band_upper == res.band_upper);
}

TEST_CASE("degenerate arm gives zero-width bands away from its atom") {
  // every RC subject fails at 1: the reference curve jumps from 1 to 0 there
  const auto rc = ObservedSample::right_censored(std::vector<double>(20, 1.0),
                                                 std::vector<int>(20, 1));
  const auto lb = ObservedSample::length_biased(std::vector<double>(20, 0.5),
                                                std::vector<double>(20, 1.0),
                                                std::vector<int>(20, 1));
  BootstrapOptions opts;
  opts.replicates = 10;
  const BootstrapResult res = bootstrap_drm(rc, lb, BasisSpec::log(), opts);
  CHECK(res.band_lower(0) == doctest::Approx(res.band_upper(0)));
}
