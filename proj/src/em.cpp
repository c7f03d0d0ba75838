#include "drmsurv/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace drmsurv {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kReference = -1;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One sample laid out on the shared support points.
struct Arm {
  bool truncated = false;  // LBRC: adds the truncated-out expectation
  int tilt = kReference;   // index of the tilted arm, or kReference
  VectorXd events;         // r_j
  // (first support index compatible with the censoring time, multiplicity)
  std::vector<std::pair<Index, double>> censored;
  double n = 0.0;
};

bool is_rc_like(Scheme s) { return s == Scheme::RC || s == Scheme::IID; }

void check_em_scheme(const ObservedSample& s) {
  if (!is_rc_like(s.scheme()) && s.scheme() != Scheme::LBRC)
    throw Error(ErrorKind::InvalidInput,
                "EM estimators take RC or LBRC samples, got " +
                    std::string(to_string(s.scheme())));
}

// Censored subjects are compatible with support points t_j >= X_i. An RC
// subject censored beyond the last point carries no usable information about
// the grid and is spread over all of it (its likelihood factor is sum p = 1).
Arm layout_arm(const ObservedSample& s, const VectorXd& points, int tilt) {
  check_em_scheme(s);
  Arm arm;
  arm.truncated = s.scheme() == Scheme::LBRC;
  arm.tilt = tilt;
  arm.events = VectorXd::Zero(points.size());
  arm.n = static_cast<double>(s.size());
  std::map<Index, double> cens;
  const double* first = points.data();
  const double* last = first + points.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s.times()[i];
    if (s.status()[i] == 1) {
      const Index j = find_point(points, x);
      if (j < 0) {
        std::ostringstream os;
        os << "support violation: event time " << x
           << " is not a support point";
        throw Error(ErrorKind::SupportViolation, os.str());
      }
      arm.events(j) += 1.0;
    } else {
      Index j = static_cast<Index>(std::lower_bound(first, last, x) - first);
      if (j == points.size()) {
        if (arm.truncated) {
          std::ostringstream os;
          os << "support violation: LBRC censoring time " << x
             << " lies beyond the support";
          throw Error(ErrorKind::SupportViolation, os.str());
        }
        j = 0;
      }
      cens[j] += 1.0;
    }
  }
  arm.censored.assign(cens.begin(), cens.end());
  return arm;
}

// Unique RC event times together with every LBRC time.
VectorXd support_points(const std::vector<const ObservedSample*>& samples) {
  std::vector<double> pts;
  for (const auto* s : samples) {
    check_em_scheme(*s);
    for (std::size_t i = 0; i < s->size(); ++i)
      if (s->scheme() == Scheme::LBRC || s->status()[i] == 1)
        pts.push_back(s->times()[i]);
  }
  if (pts.empty())
    throw Error(ErrorKind::NoSupportPoints,
                "no support points: no RC events and no LBRC observations");
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return Eigen::Map<const VectorXd>(pts.data(), static_cast<Index>(pts.size()));
}

struct Scratch {
  VectorXd suffix;
  VectorXd acc;
};

// E-step for one arm with its current masses `m`: adds the expected
// complete-data counts to `w` and returns the arm's observed log-likelihood.
// `pi` receives the acceptance probability sum_j m_j t_j / t_max.
double expect_arm(const Arm& arm, const VectorXd& m, const VectorXd& t,
                  double t_max, VectorXd* w, double* pi, Scratch& scratch) {
  const Index k = m.size();
  double ll = 0.0;
  for (Index j = 0; j < k; ++j) {
    if (arm.events(j) > 0.0) {
      if (!(m(j) > 0.0)) return kNegInf;
      ll += arm.events(j) * std::log(m(j));
    }
  }
  if (w) *w += arm.events;

  if (!arm.censored.empty()) {
    scratch.suffix.resize(k + 1);
    scratch.suffix(k) = 0.0;
    for (Index j = k - 1; j >= 0; --j)
      scratch.suffix(j) = scratch.suffix(j + 1) + m(j);
    scratch.acc.setZero(k);
    for (const auto& [start, count] : arm.censored) {
      const double d = scratch.suffix(start);
      if (!(d > 0.0)) return kNegInf;
      scratch.acc(start) += count / d;
      ll += count * std::log(d);
    }
    if (w) {
      double running = 0.0;
      for (Index j = 0; j < k; ++j) {
        running += scratch.acc(j);
        (*w)(j) += m(j) * running;
      }
    }
  }

  const double mu = m.dot(t);
  if (pi) *pi = mu / t_max;
  if (arm.truncated) {
    if (!(mu > 0.0)) return kNegInf;
    ll -= arm.n * std::log(mu);
    if (w) {
      const double scale = arm.n * t_max / mu;
      for (Index j = 0; j < k; ++j)
        (*w)(j) += scale * m(j) * (1.0 - t(j) / t_max);
    }
  }
  return ll;
}

struct EmState {
  VectorXd p;
  std::vector<DrmParams> params;
  std::vector<VectorXd> q;

  const VectorXd& masses_for(const Arm& arm) const {
    return arm.tilt == kReference ? p : q[static_cast<std::size_t>(arm.tilt)];
  }
};

double state_loglik(const std::vector<Arm>& arms, const EmState& state,
                    const VectorXd& t, Scratch& scratch) {
  double ll = 0.0;
  for (const auto& arm : arms)
    ll += expect_arm(arm, state.masses_for(arm), t, t(t.size() - 1), nullptr,
                     nullptr, scratch);
  return ll;
}

struct EmOutcome {
  EmState state;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

void validate(const EmOptions& opts) {
  if (!(opts.tol > 0.0))
    throw Error(ErrorKind::InvalidInput, "EM tolerance must be positive");
  if (opts.max_iters < 1)
    throw Error(ErrorKind::InvalidInput, "EM needs max_iters >= 1");
  if (!(opts.inner_tol > 0.0) || opts.inner_max_iters < 1)
    throw Error(ErrorKind::InvalidInput, "invalid inner solver settings");
}

// One EM update x -> next, reporting the observed log-likelihood at x.
// `solved` is false when the M-step could not be carried out.
struct StepResult {
  double loglik = kNegInf;
  bool solved = true;
};

struct AccelOutcome {
  VectorXd x;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

// EM with squared extrapolation (SQUAREM, step length -|r|/|v|). Each
// iteration takes two EM steps from x0, extrapolates, and applies one more
// EM step to the extrapolated point. That result is kept only if its
// likelihood is at least that of the second plain step's input; otherwise
// the plain two-step result is used. The likelihood therefore never
// decreases along accepted iterates.
template <class Step, class Distance, class Project>
AccelOutcome squarem(VectorXd x, const EmOptions& opts, Step&& step,
                     Distance&& distance, Project&& project) {
  AccelOutcome out;
  VectorXd x1(x.size()), x2(x.size()), x3(x.size()), xp(x.size());
  double step_max = 1.0;
  auto checked = [&](const VectorXd& from, VectorXd& to) {
    const StepResult r = step(from, to);
    if (r.solved && !std::isfinite(r.loglik))
      throw Error(ErrorKind::SupportViolation,
                  "support violation: an observation has zero probability");
    return r;
  };

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const StepResult r0 = checked(x, x1);
    out.trace.push_back(r0.loglik);
    if (!r0.solved) break;

    const VectorXd* next = &x1;
    if (opts.accelerate) {
      const StepResult r1 = checked(x1, x2);
      if (!r1.solved) {
        out.x = std::move(x1);
        out.iterations = iter + 1;
        return out;
      }
      next = &x2;
      const VectorXd r = x1 - x;
      const VectorXd v = x2 - x1 - r;
      const double rn = r.norm(), vn = v.norm();
      if (rn > 0.0 && vn > 0.0) {
        double alpha = -rn / vn;
        alpha = std::max(std::min(alpha, -1.0), -step_max);
        xp = x - 2.0 * alpha * r + alpha * alpha * v;
        if (project(xp)) {
          try {
            const StepResult rp = step(xp, x3);
            if (rp.solved && std::isfinite(rp.loglik) && rp.loglik >= r1.loglik) {
              next = &x3;
              if (alpha == -step_max) step_max *= 4.0;
            }
          } catch (const Error&) {
            // The extrapolated point is unusable; keep the plain steps.
          }
        }
        if (next != &x3 && alpha == -step_max) step_max = std::max(1.0, step_max / 4.0);
      }
    }

    const double delta = distance(x, *next);
    x = *next;
    out.iterations = iter + 1;
    if (delta < opts.tol) {
      out.converged = true;
      break;
    }
  }
  out.x = std::move(x);
  return out;
}

EmOutcome run_em(const VectorXd& t, const std::vector<Arm>& arms,
                 std::size_t n_tilted, const MatrixXd& h,
                 const EmOptions& opts, const DrmStart* start = nullptr) {
  validate(opts);
  const Index k = t.size();
  const double t_max = t(k - 1);
  const Index d = h.cols();
  const bool estimate_tilt = n_tilted > 0 && !opts.theta_fixed_at_zero;
  const auto n_arms_tilted = static_cast<Index>(n_tilted);

  // x stacks p and every theta; each alpha follows from them.
  VectorXd x(k + n_arms_tilted * d);
  x.head(k).setConstant(1.0 / static_cast<double>(k));
  x.tail(n_arms_tilted * d).setZero();
  if (start) {
    // Blend with uniform so that no point starts at zero mass, which EM
    // could never leave.
    VectorXd warm = VectorXd::Zero(k);
    for (Index j = 0; j < k; ++j) {
      const Index i = find_point(start->points, t(j));
      if (i >= 0) warm(j) = start->masses(i);
    }
    if (warm.sum() > 0.0) x.head(k) = 0.9 * warm / warm.sum() + 0.1 * x.head(k);
    if (estimate_tilt && start->theta.size() == d && start->theta.allFinite())
      x.segment(k, d) = start->theta;
  }

  auto unpack = [&](const VectorXd& xs) {
    EmState st;
    st.p = xs.head(k);
    for (Index a = 0; a < n_arms_tilted; ++a) {
      DrmParams prm{0.0, xs.segment(k + a * d, d)};
      if (estimate_tilt) prm.alpha = normalizing_alpha(st.p, h, prm.theta);
      st.q.push_back(tilt(st.p, h, prm));
      st.params.push_back(std::move(prm));
    }
    return st;
  };

  Scratch scratch;
  VectorXd w_total(k), w_arm(k);
  std::vector<VectorXd> w_tilted(n_tilted, VectorXd(k));
  const Index block = d + 1;
  VectorXd beta = VectorXd::Zero(n_arms_tilted * block);

  auto step = [&](const VectorXd& xs, VectorXd& next) {
    const EmState st = unpack(xs);
    w_total.setZero();
    for (auto& v : w_tilted) v.setZero();
    StepResult res;
    res.loglik = 0.0;
    for (const auto& arm : arms) {
      w_arm.setZero();
      res.loglik += expect_arm(arm, st.masses_for(arm), t, t_max, &w_arm, nullptr,
                               scratch);
      w_total += w_arm;
      if (arm.tilt != kReference)
        w_tilted[static_cast<std::size_t>(arm.tilt)] += w_arm;
    }
    if (!std::isfinite(res.loglik)) return res;

    next.resize(xs.size());
    if (!estimate_tilt) {
      next.head(k) = w_total / w_total.sum();
      next.tail(n_arms_tilted * d) = xs.tail(n_arms_tilted * d);
      return res;
    }
    for (Index a = 0; a < n_arms_tilted; ++a) {
      beta(a * block) = st.params[static_cast<std::size_t>(a)].alpha;
      beta.segment(a * block + 1, d) = st.params[static_cast<std::size_t>(a)].theta;
    }
    ProfileObjective objective(w_total, w_tilted, h);
    bool ok = objective.maximize(beta, opts.inner_tol, opts.inner_max_iters);
    if (!ok) {
      beta.setZero();
      ok = objective.maximize(beta, opts.inner_tol, opts.inner_max_iters);
    }
    if (!ok) {
      res.solved = false;
      return res;
    }
    next.head(k) = objective.masses(beta);
    next.head(k) /= next.head(k).sum();
    for (Index a = 0; a < n_arms_tilted; ++a) {
      const auto theta = beta.segment(a * block + 1, d);
      if (theta.lpNorm<Eigen::Infinity>() > opts.theta_bound) {
        std::ostringstream os;
        os << "tilt unbounded / separation: |theta| exceeded " << opts.theta_bound;
        throw Error(ErrorKind::TiltUnbounded, os.str());
      }
      next.segment(k + a * d, d) = theta;
    }
    return res;
  };

  auto distance = [&](const VectorXd& a, const VectorXd& b) {
    double delta = (a - b).lpNorm<Eigen::Infinity>();
    if (estimate_tilt) {
      for (Index arm = 0; arm < n_arms_tilted; ++arm) {
        const auto ta = a.segment(k + arm * d, d);
        const auto tb = b.segment(k + arm * d, d);
        delta = std::max(delta, std::abs(normalizing_alpha(a.head(k), h, ta) -
                                         normalizing_alpha(b.head(k), h, tb)));
      }
    }
    return delta;
  };

  auto project = [&](VectorXd& xs) {
    if (!xs.allFinite() || (xs.head(k).array() < 0.0).any()) return false;
    const double total = xs.head(k).sum();
    if (!(total > 0.0)) return false;
    xs.head(k) /= total;
    return n_arms_tilted * d == 0 ||
           xs.tail(n_arms_tilted * d).lpNorm<Eigen::Infinity>() <= opts.theta_bound;
  };

  AccelOutcome acc = squarem(std::move(x), opts, step, distance, project);

  EmOutcome out;
  out.state = unpack(acc.x);
  out.trace = std::move(acc.trace);
  out.iterations = acc.iterations;
  out.converged = acc.converged;
  const double final_ll = state_loglik(arms, out.state, t, scratch);
  if (!std::isfinite(final_ll))
    throw Error(ErrorKind::SupportViolation,
                "support violation: an observation has zero probability");
  out.trace.push_back(final_ll);
  return out;
}

DrmFit to_drm_fit(const VectorXd& t, EmOutcome&& em, Index d) {
  DrmFit fit;
  fit.grid = t;
  fit.p = std::move(em.state.p);
  if (em.state.params.empty()) {
    fit.params = DrmParams{0.0, VectorXd::Zero(d)};
    fit.q = fit.p;
  } else {
    fit.params = std::move(em.state.params.front());
    fit.q = std::move(em.state.q.front());
  }
  fit.pi_hat = fit.q.dot(t) / t(t.size() - 1);
  fit.loglik_trace = std::move(em.trace);
  fit.iterations = em.iterations;
  fit.converged = em.converged;
  return fit;
}

MatrixXd checked_basis(const BasisSpec& basis, const VectorXd& t) {
  if (basis.dimension() < 1)
    throw Error(ErrorKind::InvalidInput, "basis needs at least one component");
  return basis_matrix(basis, t);
}

}  // namespace

// ---------------------------------------------------------------------------
// ProfileObjective

ProfileObjective::ProfileObjective(VectorXd total_weights,
                                   std::vector<VectorXd> tilted_weights,
                                   const MatrixXd& h)
    : w_(std::move(total_weights)), v_(std::move(tilted_weights)) {
  const Index k = w_.size();
  design_.resize(k, h.cols() + 1);
  design_.col(0).setOnes();
  design_.rightCols(h.cols()) = h;
  dim_ = static_cast<Index>(v_.size()) * design_.cols();

  total_ = w_.sum();
  double tilted_total = 0.0;
  cross_ = 0.0;
  log_w_.resize(k);
  for (Index j = 0; j < k; ++j) {
    log_w_(j) = w_(j) > 0.0 ? std::log(w_(j)) : kNegInf;
    if (w_(j) > 0.0) cross_ += w_(j) * log_w_(j);
  }
  for (const auto& v : v_) {
    const double lam = v.sum();
    tilted_total += lam;
    log_lambda_.push_back(lam > 0.0 ? std::log(lam) : kNegInf);
  }
  const double lambda0 = total_ - tilted_total;
  log_lambda0_ = lambda0 > 1e-12 * total_ ? std::log(lambda0) : kNegInf;
}

void ProfileObjective::evaluate(const VectorXd& beta, double* value,
                                VectorXd* grad, MatrixXd* hess,
                                VectorXd* masses) const {
  const Index k = w_.size();
  const Index block = design_.cols();
  const auto n_arms = static_cast<Index>(v_.size());

  // a_kj = log lambda_k + u_kj
  MatrixXd u(k, n_arms), a(k, n_arms);
  for (Index arm = 0; arm < n_arms; ++arm) {
    u.col(arm) = design_ * beta.segment(arm * block, block);
    a.col(arm) = u.col(arm).array() + log_lambda_[static_cast<std::size_t>(arm)];
  }
  VectorXd log_den(k);
  for (Index j = 0; j < k; ++j) {
    double top = log_lambda0_;
    for (Index arm = 0; arm < n_arms; ++arm) top = std::max(top, a(j, arm));
    double acc = std::isfinite(log_lambda0_) ? std::exp(log_lambda0_ - top) : 0.0;
    for (Index arm = 0; arm < n_arms; ++arm) acc += std::exp(a(j, arm) - top);
    log_den(j) = top + std::log(acc);
  }

  if (value) {
    double f = cross_ - w_.dot(log_den);
    for (Index arm = 0; arm < n_arms; ++arm)
      f += v_[static_cast<std::size_t>(arm)].dot(u.col(arm));
    *value = f;
  }
  if (masses) {
    masses->resize(k);
    for (Index j = 0; j < k; ++j)
      (*masses)(j) = w_(j) > 0.0 ? std::exp(log_w_(j) - log_den(j)) : 0.0;
  }
  if (!grad && !hess) return;

  MatrixXd share(k, n_arms);  // s_kj
  for (Index arm = 0; arm < n_arms; ++arm)
    share.col(arm) = (a.col(arm) - log_den).array().exp();

  if (grad) {
    grad->resize(dim_);
    for (Index arm = 0; arm < n_arms; ++arm) {
      const VectorXd resid =
          v_[static_cast<std::size_t>(arm)] - w_.cwiseProduct(share.col(arm));
      grad->segment(arm * block, block) = design_.transpose() * resid;
    }
  }
  if (hess) {
    hess->resize(dim_, dim_);
    for (Index r = 0; r < n_arms; ++r) {
      for (Index c = r; c < n_arms; ++c) {
        VectorXd weight = -w_.cwiseProduct(share.col(r)).cwiseProduct(share.col(c));
        if (r == c) weight += w_.cwiseProduct(share.col(r));
        const MatrixXd blk =
            -(design_.transpose() * (design_.array().colwise() * weight.array()).matrix());
        hess->block(r * block, c * block, block, block) = blk;
        if (c != r)
          hess->block(c * block, r * block, block, block) = blk.transpose();
      }
    }
  }
}

double ProfileObjective::value(const VectorXd& beta) const {
  double f = 0.0;
  evaluate(beta, &f, nullptr, nullptr, nullptr);
  return f;
}

VectorXd ProfileObjective::gradient(const VectorXd& beta) const {
  VectorXd g;
  evaluate(beta, nullptr, &g, nullptr, nullptr);
  return g;
}

MatrixXd ProfileObjective::hessian(const VectorXd& beta) const {
  MatrixXd hm;
  evaluate(beta, nullptr, nullptr, &hm, nullptr);
  return hm;
}

VectorXd ProfileObjective::masses(const VectorXd& beta) const {
  VectorXd m;
  evaluate(beta, nullptr, nullptr, nullptr, &m);
  return m;
}

bool ProfileObjective::maximize(VectorXd& beta, double tol,
                                int max_iters) const {
  const double scale = std::max(1.0, total_);
  double f = 0.0;
  VectorXd g;
  MatrixXd hm;
  for (int it = 0; it < max_iters; ++it) {
    evaluate(beta, &f, &g, &hm, nullptr);

    if (!std::isfinite(f) || !g.allFinite()) return false;
    if (g.lpNorm<Eigen::Infinity>() <= tol * scale) return true;

    MatrixXd neg = -hm;
    neg.diagonal().array() += 1e-12 * std::max(1.0, neg.diagonal().maxCoeff());
    Eigen::LDLT<MatrixXd> ldlt(neg);
    VectorXd dir = ldlt.solve(g);
    double slope = g.dot(dir);
    bool newton = true;
    if (ldlt.info() != Eigen::Success || !dir.allFinite() || !(slope > 0.0)) {
      newton = false;
      dir = g / scale;
      slope = g.dot(dir);
    }

    // Predicted gain below the resolution of f: a line search cannot tell
    // steps apart, so take the full Newton step and stop.
    if (newton && 0.5 * slope <= 1e-14 * std::max(1.0, std::abs(f))) {
      beta += dir;
      return true;
    }

    bool moved = false;
    for (double step = 1.0; step > 1e-14; step *= 0.5) {
      const VectorXd cand = beta + step * dir;
      const double fc = value(cand);
      if (std::isfinite(fc) && fc >= f + 1e-4 * step * slope) {
        beta = cand;
        moved = true;
        break;
      }
    }
    // No representable ascent left: numerically at the maximum.
    if (!moved) return true;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Estimators

KmEmFit fit_km_em(const ObservedSample& rc, const EmOptions& opts) {
  validate(opts);
  if (!is_rc_like(rc.scheme()))
    throw Error(ErrorKind::InvalidInput, "self-consistency EM needs RC data");
  std::vector<double> ev;
  double max_cens = -1.0;
  for (std::size_t i = 0; i < rc.size(); ++i) {
    if (rc.status()[i] == 1)
      ev.push_back(rc.times()[i]);
    else
      max_cens = std::max(max_cens, rc.times()[i]);
  }
  if (ev.empty())
    throw Error(ErrorKind::NoEvents, "no events: every observation is censored");
  std::sort(ev.begin(), ev.end());
  ev.erase(std::unique(ev.begin(), ev.end()), ev.end());
  const auto k = static_cast<Index>(ev.size());
  const VectorXd t = Eigen::Map<const VectorXd>(ev.data(), k);

  // Censoring at X means T > X; mass past the last censoring time lives in an
  // extra slot beyond every event time (the defective tail).
  const bool tail = max_cens >= ev.back();
  const Index slots = k + (tail ? 1 : 0);

  VectorXd events = VectorXd::Zero(slots);
  std::map<Index, double> cens;
  for (std::size_t i = 0; i < rc.size(); ++i) {
    const double x = rc.times()[i];
    if (rc.status()[i] == 1) {
      events(find_point(t, x)) += 1.0;
    } else {
      const auto j = static_cast<Index>(
          std::upper_bound(ev.begin(), ev.end(), x) - ev.begin());
      cens[j] += 1.0;
    }
  }
  const double n = static_cast<double>(rc.size());

  VectorXd p = VectorXd::Constant(slots, 1.0 / static_cast<double>(slots));
  VectorXd suffix(slots + 1), acc(slots);
  KmEmFit fit{SurvivalCurve(t, VectorXd::Constant(k, 1.0 / static_cast<double>(slots))),
              {}, 0, false};

  auto loglik = [&](const VectorXd& m) {
    suffix(slots) = 0.0;
    for (Index j = slots - 1; j >= 0; --j) suffix(j) = suffix(j + 1) + m(j);
    double ll = 0.0;
    for (Index j = 0; j < slots; ++j)
      if (events(j) > 0.0) ll += events(j) * std::log(m(j));
    for (const auto& [start, count] : cens) ll += count * std::log(suffix(start));
    return ll;
  };

  auto step = [&](const VectorXd& m, VectorXd& next) {
    StepResult res;
    res.loglik = loglik(m);  // also fills suffix
    if (!std::isfinite(res.loglik)) return res;
    acc.setZero();
    for (const auto& [start, count] : cens) acc(start) += count / suffix(start);
    double running = 0.0;
    next.resize(slots);
    for (Index j = 0; j < slots; ++j) {
      running += acc(j);
      next(j) = (events(j) + m(j) * running) / n;
    }
    return res;
  };
  auto distance = [](const VectorXd& a, const VectorXd& b) {
    return (a - b).lpNorm<Eigen::Infinity>();
  };
  auto project = [](VectorXd& m) {
    if (!m.allFinite() || (m.array() < 0.0).any()) return false;
    m /= m.sum();
    return true;
  };
  AccelOutcome res = squarem(std::move(p), opts, step, distance, project);
  p = std::move(res.x);
  fit.loglik_trace = std::move(res.trace);
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  fit.loglik_trace.push_back(loglik(p));
  fit.curve = SurvivalCurve(t, p.head(k));
  return fit;
}

DrmFit fit_npmle_lbrc(const ObservedSample& lbrc, const EmOptions& opts) {
  if (lbrc.scheme() != Scheme::LBRC)
    throw Error(ErrorKind::InvalidInput, "LBRC NPMLE needs an LBRC sample");
  const VectorXd t = support_points({&lbrc});
  std::vector<Arm> arms{layout_arm(lbrc, t, kReference)};
  return to_drm_fit(t, run_em(t, arms, 0, MatrixXd(t.size(), 0), opts), 0);
}

DrmFit fit_drm(const ObservedSample& rc, const ObservedSample& lbrc,
               const BasisSpec& basis, const EmOptions& opts) {
  return fit_drm(rc, lbrc, basis, opts, nullptr);
}

DrmFit fit_drm(const ObservedSample& rc, const ObservedSample& lbrc,
               const BasisSpec& basis, const EmOptions& opts,
               const DrmStart* start) {
  if (!is_rc_like(rc.scheme()))
    throw Error(ErrorKind::InvalidInput, "DRM reference arm must be RC");
  if (lbrc.scheme() != Scheme::LBRC)
    throw Error(ErrorKind::InvalidInput, "DRM tilted arm must be LBRC");
  const VectorXd t = support_points({&rc, &lbrc});
  const MatrixXd h = checked_basis(basis, t);
  std::vector<Arm> arms{layout_arm(rc, t, kReference), layout_arm(lbrc, t, 0)};
  return to_drm_fit(t, run_em(t, arms, 1, h, opts, start), h.cols());
}

DrmFit fit_pooled_npmle(const ObservedSample* rc, const ObservedSample* lbrc,
                        const EmOptions& opts) {
  if (!rc && !lbrc)
    throw Error(ErrorKind::NoSupportPoints, "no samples supplied");
  if (rc && !is_rc_like(rc->scheme()))
    throw Error(ErrorKind::InvalidInput, "pooled NPMLE: RC slot is not RC");
  if (lbrc && lbrc->scheme() != Scheme::LBRC)
    throw Error(ErrorKind::InvalidInput, "pooled NPMLE: LBRC slot is not LBRC");
  std::vector<const ObservedSample*> samples;
  if (rc) samples.push_back(rc);
  if (lbrc) samples.push_back(lbrc);
  const VectorXd t = support_points(samples);
  std::vector<Arm> arms;
  for (const auto* s : samples) arms.push_back(layout_arm(*s, t, kReference));
  return to_drm_fit(t, run_em(t, arms, 0, MatrixXd(t.size(), 0), opts), 0);
}

MultiDrmFit fit_drm_multi(const ObservedSample& reference,
                          const std::vector<ObservedSample>& tilted,
                          const BasisSpec& basis, const EmOptions& opts) {
  if (tilted.empty())
    throw Error(ErrorKind::InvalidInput,
                "K-sample DRM needs at least one tilted arm");
  std::vector<const ObservedSample*> samples{&reference};
  for (const auto& s : tilted) samples.push_back(&s);
  const VectorXd t = support_points(samples);
  const MatrixXd h = checked_basis(basis, t);
  std::vector<Arm> arms{layout_arm(reference, t, kReference)};
  for (std::size_t a = 0; a < tilted.size(); ++a)
    arms.push_back(layout_arm(tilted[a], t, static_cast<int>(a)));
  EmOutcome em = run_em(t, arms, tilted.size(), h, opts);

  MultiDrmFit fit;
  fit.grid = t;
  fit.p = std::move(em.state.p);
  fit.params = std::move(em.state.params);
  fit.q = std::move(em.state.q);
  fit.loglik_trace = std::move(em.trace);
  fit.iterations = em.iterations;
  fit.converged = em.converged;
  return fit;
}

double observed_loglik(const DrmParams& params, const DiscreteDistribution& p,
                       const ObservedSample* rc, const ObservedSample* lbrc,
                       const BasisSpec& basis) {
  const VectorXd& t = p.points;
  EmState state;
  state.p = p.masses;
  std::vector<Arm> arms;
  if (rc) arms.push_back(layout_arm(*rc, t, kReference));
  if (lbrc) {
    arms.push_back(layout_arm(*lbrc, t, 0));
    MatrixXd h(t.size(), 0);
    if (params.theta.size() > 0) {
      if (params.theta.size() != basis.dimension())
        throw Error(ErrorKind::InvalidInput,
                    "theta length does not match the basis dimension");
      h = basis_matrix(basis, t);
    }
    DrmParams prm{params.alpha, params.theta.size() > 0
                                    ? params.theta
                                    : VectorXd::Zero(0)};
    state.q.push_back(tilt(state.p, h, prm));
  }
  Scratch scratch;
  const double ll = state_loglik(arms, state, t, scratch);
  if (!std::isfinite(ll))
    throw Error(ErrorKind::SupportViolation,
                "support violation: an observation has zero probability");
  return ll;
}

}  // namespace drmsurv
