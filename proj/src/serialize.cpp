#include "drmsurv/serialize.hpp"

#include <cstdio>

namespace drmsurv {

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json to_json(const DrmFit& fit) {
  return {
      {"alpha", fit.params.alpha},
      {"theta", to_vec(fit.params.theta)},
      {"grid", to_vec(fit.grid)},
      {"p", to_vec(fit.p)},
      {"q", to_vec(fit.q)},
      {"pi_hat", fit.pi_hat},
      {"loglik_trace", fit.loglik_trace},
      {"converged", fit.converged},
      {"iterations", fit.iterations},
  };
}

DrmFit drm_fit_from_json(const nlohmann::json& j) {
  try {
    DrmFit fit;
    fit.params.alpha = j.at("alpha").get<double>();
    fit.params.theta = from_vec(j.at("theta").get<std::vector<double>>());
    fit.grid = from_vec(j.at("grid").get<std::vector<double>>());
    fit.p = from_vec(j.at("p").get<std::vector<double>>());
    fit.q = from_vec(j.at("q").get<std::vector<double>>());
    fit.pi_hat = j.at("pi_hat").get<double>();
    fit.loglik_trace = j.at("loglik_trace").get<std::vector<double>>();
    fit.converged = j.at("converged").get<bool>();
    fit.iterations = j.at("iterations").get<int>();
    if (fit.grid.size() != fit.p.size() || fit.grid.size() != fit.q.size())
      throw Error(ErrorKind::InvalidInput, "fit JSON arrays differ in length");
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("malformed fit JSON: ") + e.what());
  }
}

nlohmann::json to_json(const MultiDrmFit& fit) {
  nlohmann::json arms = nlohmann::json::array();
  for (std::size_t a = 0; a < fit.params.size(); ++a) {
    arms.push_back({{"alpha", fit.params[a].alpha},
                    {"theta", to_vec(fit.params[a].theta)},
                    {"q", to_vec(fit.q[a])}});
  }
  return {
      {"grid", to_vec(fit.grid)},
      {"p", to_vec(fit.p)},
      {"arms", arms},
      {"loglik_trace", fit.loglik_trace},
      {"converged", fit.converged},
      {"iterations", fit.iterations},
  };
}

nlohmann::json to_json(const SurvivalCurve& curve) {
  return {
      {"grid", to_vec(curve.points())},
      {"masses", to_vec(curve.masses())},
      {"survival", to_vec(curve.survival_at(curve.points()))},
  };
}

nlohmann::json to_json(const BootstrapResult& res) {
  nlohmann::json ci = nlohmann::json::array();
  for (const auto& c : res.theta_ci) ci.push_back({c.lower, c.upper});
  return {
      {"theta_hat", to_vec(res.fit.params.theta)},
      {"theta_ci", ci},
      {"band_points", to_vec(res.band_points)},
      {"fitted", to_vec(res.fitted)},
      {"band_lower", to_vec(res.band_lower)},
      {"band_upper", to_vec(res.band_upper)},
      {"monotone_lower", to_vec(res.monotone_lower)},
      {"monotone_upper", to_vec(res.monotone_upper)},
      {"B", res.B},
      {"level", res.level},
      {"failures", res.failures},
      {"zero_outside_ci", res.zero_outside_theta_ci()},
  };
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

nlohmann::json to_json(const RunManifest& m) {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(m.config_hash));
  return {
      {"command", m.command},
      {"config_hash", hex},
      {"seed", m.seed},
      {"version", kVersion},
      {"wall_seconds", m.wall_seconds},
  };
}

}  // namespace drmsurv
