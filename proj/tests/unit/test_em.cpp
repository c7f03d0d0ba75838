#include <doctest.h>

#include <cmath>
#include <random>

#include "drmsurv/classic.hpp"
#include "drmsurv/em.hpp"
#include "drmsurv/simulate.hpp"
#include "oracle.hpp"

using namespace drmsurv;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

ObservedSample lb_events(std::vector<double> times) {
  std::vector<double> entries(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) entries[i] = 0.5 * times[i];
  return ObservedSample::length_biased(entries, times,
                                       std::vector<int>(times.size(), 1));
}

std::vector<oracle::Obs> to_obs(const ObservedSample& s) {
  std::vector<oracle::Obs> out;
  for (std::size_t i = 0; i < s.size(); ++i)
    out.push_back({s.times()[i], s.status()[i] == 1});
  return out;
}

std::vector<double> to_std(const VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

double std_log(double x) { return std::log(x); }

// Small random instance on the times {1, 2, 3}.
struct Instance {
  ObservedSample rc;
  ObservedSample lb;
};

Instance small_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> time(1, 3), size(1, 4);
  std::bernoulli_distribution censor(0.3);
  for (;;) {
    std::vector<double> rt, lt, la;
    std::vector<int> rd, ld;
    for (int i = size(rng); i > 0; --i) {
      rt.push_back(time(rng));
      rd.push_back(censor(rng) ? 0 : 1);
    }
    for (int i = size(rng); i > 0; --i) {
      lt.push_back(time(rng));
      ld.push_back(censor(rng) ? 0 : 1);
      la.push_back(0.5);
    }
    if (std::count(rd.begin(), rd.end(), 1) == 0) continue;
    return {ObservedSample::right_censored(rt, rd),
            ObservedSample::length_biased(la, lt, ld)};
  }
}

}  // namespace

TEST_CASE("self-consistency EM reproduces the hand Kaplan-Meier") {
  const auto rc = ObservedSample::right_censored({1, 2, 3}, {1, 0, 1});
  const KmEmFit fit = fit_km_em(rc);
  CHECK(fit.converged);
  CHECK(fit.curve.survival(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
  CHECK(fit.curve.masses()(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK(fit.curve.masses()(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-8));

  const KmEmFit defective = fit_km_em(ObservedSample::right_censored({1, 2}, {1, 0}));
  CHECK(defective.curve.masses()(0) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(defective.curve.survival(1e9) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("self-consistency EM without censoring is the ecdf after one step") {
  EmOptions once;
  once.max_iters = 1;
  const KmEmFit fit = fit_km_em(ObservedSample::right_censored({1, 1, 2, 5}, {1, 1, 1, 1}), once);
  CHECK(fit.curve.masses()(0) == doctest::Approx(0.5));
  CHECK(fit.curve.masses()(1) == doctest::Approx(0.25));
  CHECK(fit.curve.masses()(2) == doctest::Approx(0.25));
}

TEST_CASE("self-consistency EM equals Kaplan-Meier on random data") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> tie(1, 12);
  std::bernoulli_distribution cens(0.35);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> t;
    std::vector<int> d;
    for (int i = 0; i < 30; ++i) {
      t.push_back(0.5 * tie(rng));
      d.push_back(cens(rng) ? 0 : 1);
    }
    d[0] = 1;
    const auto rc = ObservedSample::right_censored(t, d);
    const VectorXd xs = VectorXd::LinSpaced(40, 0.0, 7.0);
    const VectorXd a = fit_km(rc).survival_at(xs);
    const VectorXd b = fit_km_em(rc).curve.survival_at(xs);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("length-biased NPMLE closed forms") {
  const DrmFit two = fit_npmle_lbrc(lb_events({1, 2}));
  CHECK(two.p(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(two.p(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(two.pi_hat == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

  const DrmFit one = fit_npmle_lbrc(lb_events({5}));
  CHECK(one.p(0) == 1.0);
  CHECK(one.pi_hat == doctest::Approx(1.0));

  const DrmFit tied = fit_npmle_lbrc(lb_events({1, 1, 2}));
  CHECK(tied.p(0) == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(tied.p(1) == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("uncensored length-biased NPMLE is harmonic weighting") {
  const std::vector<double> t{0.7, 1.3, 2.0, 2.0, 4.5, 6.1};
  EmOptions tight;
  tight.tol = 1e-12;
  const DrmFit fit = fit_npmle_lbrc(lb_events(t), tight);
  // p_j proportional to r_j / t_j
  VectorXd expect = vec({1 / 0.7, 1 / 1.3, 2 / 2.0, 1 / 4.5, 1 / 6.1});
  expect /= expect.sum();
  CHECK((fit.p - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pooled NPMLE closed form 2 - sqrt(2)") {
  const auto rc = ObservedSample::right_censored({2}, {1});
  const auto lb = lb_events({1});
  const DrmFit fit = fit_pooled_npmle(&rc, &lb);
  CHECK(fit.p(0) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-9));
  // stationarity of log p1 + log(1 - p1) - log(2 - p1)
  const double p1 = fit.p(0);
  CHECK(std::abs(1 / p1 - 1 / (1 - p1) + 1 / (2 - p1)) < 1e-6);
  CHECK_THROWS_AS(fit_pooled_npmle(nullptr, nullptr), Error);
}

TEST_CASE("pooled NPMLE without RC equals the length-biased NPMLE") {
  const auto lb = ObservedSample::length_biased({0.1, 0.2, 0.3, 1.0}, {1, 2, 3, 4},
                                                {1, 0, 1, 1});
  const DrmFit a = fit_pooled_npmle(nullptr, &lb);
  const DrmFit b = fit_npmle_lbrc(lb);
  CHECK(a.grid == b.grid);
  CHECK((a.p - b.p).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("DRM with theta held at zero is the pooled NPMLE") {
  ScenarioConfig cfg;
  cfg.n_rc = 60;
  cfg.n_lbrc = 60;
  const auto data = generate_replication(cfg, 0.2, 0.05, 3);
  EmOptions fixed;
  fixed.theta_fixed_at_zero = true;
  const DrmFit a = fit_drm(data.rc, data.lbrc, BasisSpec::log(), fixed);
  const DrmFit b = fit_pooled_npmle(&data.rc, &data.lbrc);
  CHECK(a.params.alpha == 0.0);
  CHECK(a.params.theta.isZero());
  CHECK((a.p - b.p).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a.q - a.p).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-arm multi-sample fit equals the DRM fit") {
  ScenarioConfig cfg;
  cfg.n_rc = 40;
  cfg.n_lbrc = 40;
  const auto data = generate_replication(cfg, 0.2, 0.05, 8);
  const DrmFit a = fit_drm(data.rc, data.lbrc, BasisSpec::log());
  const MultiDrmFit b = fit_drm_multi(data.rc, {data.lbrc}, BasisSpec::log());
  CHECK((a.p - b.p).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(a.params.theta(0) == doctest::Approx(b.params[0].theta(0)).epsilon(1e-12));
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("multi-sample tilts keep their order") {
  std::mt19937_64 rng(17);
  const auto base = TrueDistSpec::gamma(1.0, 2.0);
  const auto ref = gen_rc_sample(base, 0.05, 1500, rng);
  const auto one = gen_lbrc_sample(TrueDistSpec::gamma(2.0, 2.0), 50, 0.05, 1500, rng);
  const auto two = gen_lbrc_sample(TrueDistSpec::gamma(3.0, 2.0), 50, 0.05, 1500, rng);
  const MultiDrmFit fit = fit_drm_multi(ref, {one, two}, BasisSpec::log());
  CHECK(fit.converged);
  CHECK(fit.params[0].theta(0) == doctest::Approx(1.0).epsilon(0.25));
  CHECK(fit.params[1].theta(0) > fit.params[0].theta(0));
}

TEST_CASE("identical laws give a tilt near zero") {
  std::mt19937_64 rng(5);
  const auto law = TrueDistSpec::gamma(1.0, 2.0);
  const auto a = gen_rc_sample(law, 0.05, 1500, rng);
  const auto b = gen_rc_sample(law, 0.05, 1500, rng);
  const auto c = gen_rc_sample(law, 0.05, 1500, rng);
  const MultiDrmFit fit = fit_drm_multi(a, {b, c}, BasisSpec::log());
  CHECK(std::abs(fit.params[0].theta(0)) < 0.15);
  CHECK(std::abs(fit.params[1].theta(0)) < 0.15);
}

TEST_CASE("separated samples make the tilt unbounded") {
  const auto rc = ObservedSample::right_censored({1, 1}, {1, 1});
  const auto lb = lb_events({2, 2});
  try {
    fit_drm(rc, lb, BasisSpec::log());
    FAIL("expected TiltUnbounded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TiltUnbounded);
  }
}

TEST_CASE("observed log-likelihood values") {
  const auto rc = ObservedSample::right_censored({1}, {1});
  const DiscreteDistribution point(vec({1}), vec({1}));
  CHECK(observed_loglik(DrmParams{0.0, VectorXd()}, point, &rc, nullptr,
                        BasisSpec::log()) == 0.0);

  // theta = 0 matches the common-distribution value
  const auto lb = lb_events({1, 2});
  const DiscreteDistribution p(vec({1, 2}), vec({0.4, 0.6}));
  const double a = observed_loglik(DrmParams{0.0, VectorXd::Zero(1)}, p, &rc, &lb,
                                   BasisSpec::log());
  const double b = std::log(0.4) + std::log(0.4) + std::log(0.6) - 2 * std::log(1.6);
  CHECK(a == doctest::Approx(b));

  const auto off = ObservedSample::right_censored({1.5}, {1});
  CHECK_THROWS_AS(observed_loglik(DrmParams{0.0, VectorXd()}, point, &off, nullptr,
                                  BasisSpec::log()),
                  Error);
}

TEST_CASE("final trace entry is the observed log-likelihood of the fit") {
  ScenarioConfig cfg;
  cfg.n_rc = 30;
  cfg.n_lbrc = 30;
  const auto data = generate_replication(cfg, 0.3, 0.1, 1);
  const DrmFit fit = fit_drm(data.rc, data.lbrc, BasisSpec::log());
  const double ll = observed_loglik(fit.params, DiscreteDistribution(fit.grid, fit.p),
                                    &data.rc, &data.lbrc, BasisSpec::log());
  CHECK(fit.loglik() == doctest::Approx(ll).epsilon(1e-12));
}

TEST_CASE("EM ascent and normalization on random data") {
  for (std::uint64_t r = 0; r < 40; ++r) {
    ScenarioConfig cfg;
    cfg.n_rc = 25 + static_cast<int>(r);
    cfg.n_lbrc = 25;
    const auto data = generate_replication(cfg, 0.3, 0.1, r);
    const DrmFit fit = fit_drm(data.rc, data.lbrc, BasisSpec::log());
    for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i)
      CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1] - 1e-9);
    CHECK(std::abs(fit.p.sum() - 1.0) < 1e-10);
    CHECK(std::abs(fit.q.sum() - 1.0) < 1e-8);
  }
}

TEST_CASE("profile objective derivatives match finite differences") {
  const VectorXd w = vec({3.0, 1.5, 2.0, 4.0});
  const VectorXd v = vec({0.5, 1.0, 1.5, 2.5});
  Eigen::MatrixXd h(4, 2);
  h << 0.1, 1.0, 0.4, 2.0, 0.9, 3.0, 1.2, 4.0;
  const ProfileObjective f(w, {v}, h);
  CHECK(f.dimension() == 3);
  const VectorXd beta = vec({0.2, -0.3, 0.1});
  const VectorXd g = f.gradient(beta);
  const Eigen::MatrixXd hs = f.hessian(beta);
  const double eps = 1e-6;
  for (Eigen::Index i = 0; i < 3; ++i) {
    VectorXd up = beta, dn = beta;
    up(i) += eps;
    dn(i) -= eps;
    CHECK(g(i) == doctest::Approx((f.value(up) - f.value(dn)) / (2 * eps)).epsilon(1e-6));
    const VectorXd col = (f.gradient(up) - f.gradient(dn)) / (2 * eps);
    for (Eigen::Index j = 0; j < 3; ++j)
      CHECK(hs(j, i) == doctest::Approx(col(j)).epsilon(1e-5));
  }
  VectorXd b = VectorXd::Zero(3);
  REQUIRE(f.maximize(b, 1e-12, 100));
  CHECK(f.gradient(b).cwiseAbs().maxCoeff() < 1e-9);
  // at the optimum the profiled masses sum to one
  CHECK(f.masses(b).sum() == doctest::Approx(1.0));
}

TEST_CASE("EM estimators agree with brute-force maximization") {
  std::mt19937_64 rng(99);
  int drm_checked = 0;
  for (int rep = 0; rep < 8; ++rep) {
    const Instance in = small_instance(rng);
    const auto rc = to_obs(in.rc);
    const auto lb = to_obs(in.lb);

    const DrmFit pooled = fit_pooled_npmle(&in.rc, &in.lb);
    const auto pts = to_std(pooled.grid);
    const auto best = oracle::simplex_argmax(pts.size(), [&](const std::vector<double>& m) {
      return oracle::loglik(pts, m, m, rc, lb);
    });
    for (std::size_t j = 0; j < pts.size(); ++j)
      CHECK(pooled.p(static_cast<Eigen::Index>(j)) == doctest::Approx(best[j]).epsilon(1e-3));

    DrmFit drm;
    try {
      drm = fit_drm(in.rc, in.lb, BasisSpec::log());
    } catch (const Error&) {
      continue;
    }
    const auto opt = oracle::drm_argmax(pts, rc, lb, std_log);
    if (std::abs(opt.theta) > 7.5) continue;  // optimum not interior
    ++drm_checked;
    CHECK(drm.loglik() >= opt.loglik - 1e-6);
    for (std::size_t j = 0; j < pts.size(); ++j)
      CHECK(drm.p(static_cast<Eigen::Index>(j)) == doctest::Approx(opt.p[j]).epsilon(1e-3));
  }
  CHECK(drm_checked > 0);
}

TEST_CASE("invalid options are rejected") {
  const auto lb = lb_events({1, 2});
  EmOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(fit_npmle_lbrc(lb, bad), Error);
  bad = EmOptions{};
  bad.max_iters = 0;
  CHECK_THROWS_AS(fit_npmle_lbrc(lb, bad), Error);
  CHECK_THROWS_AS(fit_drm(ObservedSample::right_censored({1}, {1}), lb, BasisSpec()), Error);
}

TEST_CASE("iteration cap reports non-convergence") {
  ScenarioConfig cfg;
  const auto data = generate_replication(cfg, 0.3, 0.1, 4);
  EmOptions capped;
  capped.max_iters = 3;
  const DrmFit fit = fit_drm(data.rc, data.lbrc, BasisSpec::log(), capped);
  CHECK_FALSE(fit.converged);
  CHECK(fit.iterations == 3);
  CHECK(fit.loglik_trace.size() == 4);
}

TEST_CASE("extrapolation does not change the fixed point") {
  ScenarioConfig cfg;
  cfg.n_rc = cfg.n_lbrc = 80;
  const auto data = generate_replication(cfg, 0.2, 0.1, 6);
  EmOptions plain, fast;
  plain.accelerate = false;
  plain.tol = fast.tol = 1e-11;
  const DrmFit a = fit_drm(data.rc, data.lbrc, BasisSpec::log(), plain);
  const DrmFit b = fit_drm(data.rc, data.lbrc, BasisSpec::log(), fast);
  CHECK(a.converged);
  CHECK(b.iterations < a.iterations);
  CHECK((a.p - b.p).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(a.params.theta(0) == doctest::Approx(b.params.theta(0)).epsilon(1e-7));
  for (std::size_t i = 1; i < a.loglik_trace.size(); ++i)
    CHECK(a.loglik_trace[i] >= a.loglik_trace[i - 1] - 1e-9);
}

TEST_CASE("affine change of basis rescales theta only") {
  ScenarioConfig cfg;
  cfg.n_rc = cfg.n_lbrc = 60;
  const auto data = generate_replication(cfg, 0.2, 0.1, 12);
  EmOptions tight;
  tight.tol = 1e-11;
  const DrmFit a = fit_drm(data.rc, data.lbrc, BasisSpec::log(), tight);
  // h(x) = 2 log x + 1
  std::vector<double> knots, values;
  for (Eigen::Index j = 0; j < a.grid.size(); ++j) {
    knots.push_back(a.grid(j));
    values.push_back(2.0 * std::log(a.grid(j)) + 1.0);
  }
  const BasisSpec affine({BasisComponent::tabulated(knots, values)});
  const DrmFit b = fit_drm(data.rc, data.lbrc, affine, tight);
  CHECK((a.p - b.p).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(b.params.theta(0) == doctest::Approx(a.params.theta(0) / 2.0).epsilon(1e-6));
  CHECK(b.loglik() == doctest::Approx(a.loglik()).epsilon(1e-10));
}

TEST_CASE("tilt identity holds at convergence") {
  ScenarioConfig cfg;
  const auto data = generate_replication(cfg, 0.2, 0.1, 21);
  const DrmFit fit = fit_drm(data.rc, data.lbrc, BasisSpec::log());
  const Eigen::MatrixXd h = basis_matrix(BasisSpec::log(), fit.grid);
  CHECK(fit.params.alpha ==
        doctest::Approx(normalizing_alpha(fit.p, h, fit.params.theta)).epsilon(1e-8));
  const VectorXd q = tilt(fit.p, h, fit.params);
  CHECK((q - fit.q).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(fit.pi_hat > 0.0);
  CHECK(fit.pi_hat <= 1.0);
}

TEST_CASE("warm start reaches the same estimate") {
  ScenarioConfig cfg;
  cfg.n_rc = cfg.n_lbrc = 100;
  const auto data = generate_replication(cfg, 0.2, 0.1, 2);
  const DrmFit cold = fit_drm(data.rc, data.lbrc, BasisSpec::log());
  const DrmStart start{cold.grid, cold.p, cold.params.theta};
  const DrmFit warm = fit_drm(data.rc, data.lbrc, BasisSpec::log(), {}, &start);
  CHECK((cold.p - warm.p).cwiseAbs().maxCoeff() < 1e-7);
}
