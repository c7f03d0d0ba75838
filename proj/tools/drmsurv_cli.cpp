// drmsurv: command-line front end for the estimators, the simulation harness
// and the bootstrap.
//
// Exit status: 0 success, 1 bad input, 2 the fit did not converge.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "drmsurv/bootstrap.hpp"
#include "drmsurv/classic.hpp"
#include "drmsurv/em.hpp"
#include "drmsurv/sample_io.hpp"
#include "drmsurv/scenario_config.hpp"
#include "drmsurv/serialize.hpp"
#include "drmsurv/simulate.hpp"

using namespace drmsurv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNoConvergence = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

const auto g_start = std::chrono::steady_clock::now();

void write_manifest(const std::string& out_path, RunManifest m) {
  if (out_path.empty() || out_path == "-") return;
  m.wall_seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - g_start)
                       .count();
  std::ofstream out(out_path + ".manifest.json");
  if (out) out << to_json(m).dump(2) << '\n';
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

BasisSpec parse_basis(const std::vector<std::string>& raw) {
  std::vector<std::string> names;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) names.push_back(part);
  }
  if (names.empty()) names.push_back("log");
  return BasisSpec::parse(names);
}

struct FitArgs {
  std::vector<std::string> rc;
  std::vector<std::string> lbrc;
  std::string estimator = "drm";
  std::vector<std::string> basis;
  double tol = 1e-8;
  int max_iters = 5000;
  std::string out;
};

struct SimulateArgs {
  std::string config;
  std::string out;
  int threads = -1;
};

struct BootstrapArgs {
  std::string rc;
  std::string lbrc;
  std::vector<std::string> basis;
  int B = 150;
  double level = 0.95;
  std::uint64_t seed = 1;
  int threads = 0;
  double tol = 1e-8;
  int max_iters = 5000;
  std::string out;
};

const std::string& single(const std::vector<std::string>& paths,
                          const std::string& estimator, const char* flag) {
  if (paths.empty())
    throw UsageError("estimator '" + estimator + "' requires " + flag);
  if (paths.size() > 1)
    throw UsageError("estimator '" + estimator + "' takes one " + flag);
  return paths.front();
}

int run_fit(const FitArgs& a, RunManifest& manifest) {
  EmOptions em;
  em.tol = a.tol;
  em.max_iters = a.max_iters;
  const std::string& e = a.estimator;
  nlohmann::json result;
  bool converged = true;

  if (e == "km") {
    const auto rc = read_sample_csv(single(a.rc, e, "--rc"), Scheme::RC);
    result = to_json(fit_km(rc));
  } else if (e == "km-ltrc") {
    const auto lt = read_sample_csv(single(a.lbrc, e, "--lbrc"), Scheme::LTRC);
    result = to_json(fit_km_ltrc(lt));
  } else if (e == "npmle-lbrc") {
    const auto lb = read_sample_csv(single(a.lbrc, e, "--lbrc"), Scheme::LBRC);
    const DrmFit fit = fit_npmle_lbrc(lb, em);
    result = to_json(fit);
    converged = fit.converged;
  } else if (e == "npmle-pooled") {
    if (a.rc.empty() && a.lbrc.empty())
      throw UsageError("estimator 'npmle-pooled' requires --rc or --lbrc");
    std::optional<ObservedSample> rc, lb;
    if (!a.rc.empty()) rc = read_sample_csv(single(a.rc, e, "--rc"), Scheme::RC);
    if (!a.lbrc.empty())
      lb = read_sample_csv(single(a.lbrc, e, "--lbrc"), Scheme::LBRC);
    const DrmFit fit = fit_pooled_npmle(rc ? &*rc : nullptr, lb ? &*lb : nullptr, em);
    result = to_json(fit);
    converged = fit.converged;
  } else if (e == "drm") {
    const auto rc = read_sample_csv(single(a.rc, e, "--rc"), Scheme::RC);
    const auto lb = read_sample_csv(single(a.lbrc, e, "--lbrc"), Scheme::LBRC);
    const DrmFit fit = fit_drm(rc, lb, parse_basis(a.basis), em);
    result = to_json(fit);
    converged = fit.converged;
  } else if (e == "drm-multi") {
    // The first --rc is the reference arm; further --rc and every --lbrc are tilted.
    if (a.rc.empty()) throw UsageError("estimator 'drm-multi' requires --rc");
    if (a.rc.size() + a.lbrc.size() < 2)
      throw UsageError("estimator 'drm-multi' requires at least one tilted arm");
    const auto ref = read_sample_csv(a.rc.front(), Scheme::RC);
    std::vector<ObservedSample> tilted;
    for (std::size_t i = 1; i < a.rc.size(); ++i)
      tilted.push_back(read_sample_csv(a.rc[i], Scheme::RC));
    for (const auto& path : a.lbrc) tilted.push_back(read_sample_csv(path, Scheme::LBRC));
    const MultiDrmFit fit = fit_drm_multi(ref, tilted, parse_basis(a.basis), em);
    result = to_json(fit);
    converged = fit.converged;
  } else {
    throw UsageError("unknown estimator '" + e + "'");
  }
  result["estimator"] = e;
  write_text(a.out, result.dump(2) + '\n');
  write_manifest(a.out, manifest);
  if (!converged) {
    std::cerr << "warning: EM did not converge within " << a.max_iters
              << " iterations\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

int run_simulate(const SimulateArgs& a, RunManifest& manifest) {
  std::ifstream in(a.config);
  if (!in) throw UsageError("cannot open config " + a.config);
  std::stringstream buf;
  buf << in.rdbuf();
  manifest.config_hash = fnv1a(buf.str());
  std::istringstream text(buf.str());
  SimulationPlan plan = parse_simulation_config(text, a.config);
  if (a.threads >= 0) plan.base.threads = a.threads;
  manifest.seed = plan.base.seed;

  std::vector<TableRow> rows;
  for (const auto& cell : plan.cells()) {
    std::cerr << "RC " << cell.rc_cens_target * 100 << "% / LBRC "
              << cell.lbrc_cens_target * 100 << "%, n = " << cell.n_rc << '/'
              << cell.n_lbrc << " ..." << std::endl;
    rows.push_back({cell, run_scenario(cell)});
  }
  std::ostringstream csv;
  write_table_csv(csv, plan.base.estimators, rows);
  write_text(a.out, csv.str());
  write_manifest(a.out, manifest);
  return kExitOk;
}

int run_bootstrap(const BootstrapArgs& a, RunManifest& manifest) {
  const auto rc = read_sample_csv(a.rc, Scheme::RC);
  const auto lb = read_sample_csv(a.lbrc, Scheme::LBRC);
  BootstrapOptions opts;
  opts.replicates = a.B;
  opts.level = a.level;
  opts.seed = a.seed;
  opts.threads = a.threads;
  opts.em.tol = a.tol;
  opts.em.max_iters = a.max_iters;
  manifest.seed = a.seed;
  const BootstrapResult res = bootstrap_drm(rc, lb, parse_basis(a.basis), opts);

  for (std::size_t c = 0; c < res.theta_ci.size(); ++c) {
    std::printf("theta[%zu] = %.6g, %g%% CI [%.6g, %.6g]\n", c,
                res.fit.params.theta(static_cast<Eigen::Index>(c)),
                100.0 * a.level, res.theta_ci[c].lower, res.theta_ci[c].upper);
  }
  std::printf("%s\n", res.zero_outside_theta_ci() ? "0 outside CI" : "0 inside CI");
  if (res.failures > 0)
    std::printf("failed resamples: %d of %d\n", res.failures, res.B);
  if (!a.out.empty()) {
    write_text(a.out, to_json(res).dump(2) + '\n');
    write_manifest(a.out, manifest);
  }
  return res.fit.converged ? kExitOk : kExitNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density ratio model estimation for right-censored and "
               "length-biased survival data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one estimator to CSV samples");
  fit_cmd->add_option("--rc", fit.rc, "Right-censored sample (time,status)");
  fit_cmd->add_option("--lbrc", fit.lbrc, "Length-biased sample (entry,time,status)");
  fit_cmd->add_option("--estimator", fit.estimator, "Estimator")
      ->check(CLI::IsMember({"km", "km-ltrc", "npmle-lbrc", "npmle-pooled", "drm",
                             "drm-multi"}));
  fit_cmd->add_option("--basis", fit.basis, "Basis functions: log, sqrt, x, x2");
  fit_cmd->add_option("--tol", fit.tol, "EM tolerance")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--max-iters", fit.max_iters, "EM iteration cap")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--out", fit.out, "Output JSON (stdout if omitted)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo table");
  sim_cmd->add_option("--config", sim.config, "Simulation config")->required();
  sim_cmd->add_option("--out", sim.out, "Output CSV (stdout if omitted)");
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");

  BootstrapArgs boot;
  auto* boot_cmd = app.add_subcommand("bootstrap", "Bootstrap confidence intervals");
  boot_cmd->add_option("--rc", boot.rc, "Right-censored sample")->required();
  boot_cmd->add_option("--lbrc", boot.lbrc, "Length-biased sample")->required();
  boot_cmd->add_option("--basis", boot.basis, "Basis functions");
  boot_cmd->add_option("-B,--replicates", boot.B, "Bootstrap replicates");
  boot_cmd->add_option("--level", boot.level, "Confidence level")
      ->check(CLI::Range(0.0, 1.0));
  boot_cmd->add_option("--seed", boot.seed, "Random seed");
  boot_cmd->add_option("--threads", boot.threads, "Worker threads (0 = all cores)");
  boot_cmd->add_option("--tol", boot.tol, "EM tolerance");
  boot_cmd->add_option("--max-iters", boot.max_iters, "EM iteration cap");
  boot_cmd->add_option("--out", boot.out, "Output JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  RunManifest manifest;
  const std::string line = join_args(argc, argv);
  manifest.command = line;
  manifest.config_hash = fnv1a(line);
  try {
    if (*fit_cmd) return run_fit(fit, manifest);
    if (*sim_cmd) return run_simulate(sim, manifest);
    return run_bootstrap(boot, manifest);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.kind() == ErrorKind::TiltUnbounded) return kExitNoConvergence;
    return kExitInput;
  }
}
