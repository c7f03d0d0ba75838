#ifndef DRMSURV_SERIALIZE_HPP_
#define DRMSURV_SERIALIZE_HPP_

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "drmsurv/bootstrap.hpp"
#include "drmsurv/em.hpp"

namespace drmsurv {

// {alpha, theta[], grid[], p[], q[], pi_hat, loglik_trace[], converged, iterations}
nlohmann::json to_json(const DrmFit& fit);
DrmFit drm_fit_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MultiDrmFit& fit);

// {grid[], masses[], survival[]}
nlohmann::json to_json(const SurvivalCurve& curve);

// {theta_ci, band_points[], band_lower[], band_upper[], B, level, failures, ...}
nlohmann::json to_json(const BootstrapResult& res);

/// Provenance written next to every output file as <out>.manifest.json.
struct RunManifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

std::uint64_t fnv1a(std::string_view bytes);
nlohmann::json to_json(const RunManifest& m);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace drmsurv

#endif  // DRMSURV_SERIALIZE_HPP_
