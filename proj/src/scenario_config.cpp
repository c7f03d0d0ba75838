#include "drmsurv/scenario_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace drmsurv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  double real(const std::string& key, const std::string& v) const {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
      fail(key, "expected a number, got '" + v + "'");
    return x;
  }

  long long integer(const std::string& key, const std::string& v) const {
    long long x = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
      fail(key, "expected an integer, got '" + v + "'");
    return x;
  }

  std::uint64_t unsigned_integer(const std::string& key, const std::string& v) const {
    std::uint64_t x = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
      fail(key, "expected a nonnegative integer, got '" + v + "'");
    return x;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw Error(ErrorKind::InvalidInput, source_ + ": " + key + ": " + msg);
  }

 private:
  std::string source_;
};

TrueDistSpec make_dist(const std::string& family, double shape, double scale,
                       const Reader& rd, const std::string& key) {
  if (family == "gamma") return TrueDistSpec::gamma(shape, scale);
  if (family == "exponential") return TrueDistSpec::exponential(scale);
  rd.fail(key, "family must be gamma or exponential");
}

std::string percent(double target) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::round(target * 1e6) / 1e4);
  return buf;
}

}  // namespace

std::vector<ScenarioConfig> SimulationPlan::cells() const {
  std::vector<ScenarioConfig> out;
  for (int nl : n_lbrc)
    for (double cl : lbrc_censoring)
      for (int nr : n_rc)
        for (double cr : rc_censoring) {
          ScenarioConfig c = base;
          c.rc_cens_target = cr;
          c.lbrc_cens_target = cl;
          c.n_rc = nr;
          c.n_lbrc = nl;
          out.push_back(std::move(c));
        }
  return out;
}

SimulationPlan parse_simulation_config(std::istream& in,
                                       const std::string& source) {
  const Reader rd(source);
  std::map<std::string, std::string> kv;
  std::vector<std::string> unknown;
  static const std::vector<std::string> known{
      "rc_family",   "rc_shape",      "rc_scale",   "lbrc_family",
      "lbrc_shape",  "lbrc_scale",    "rc_censoring", "lbrc_censoring",
      "n_rc",        "n_lbrc",        "tau",        "basis",
      "replications", "seed",         "estimators", "eval_points",
      "tol",         "max_iters",     "theta_bound", "threads"};

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::InvalidInput,
                  source + ":" + std::to_string(lineno) +
                      ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(known.begin(), known.end(), key) == known.end())
      unknown.push_back(key);
    else
      kv[key] = value;
  }
  if (!unknown.empty()) {
    std::string msg = source + ": invalid config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw Error(ErrorKind::InvalidInput, msg);
  }

  SimulationPlan plan;
  ScenarioConfig& b = plan.base;
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  auto dist = [&](const std::string& prefix, const TrueDistSpec& dflt) {
    const std::string* fam = get(prefix + "_family");
    const std::string* shp = get(prefix + "_shape");
    const std::string* scl = get(prefix + "_scale");
    const std::string family =
        fam ? *fam : (dflt.family == Family::Exponential ? "exponential" : "gamma");
    const double shape = shp ? rd.real(prefix + "_shape", *shp) : dflt.shape;
    const double scale = scl ? rd.real(prefix + "_scale", *scl) : dflt.scale;
    if (family == "exponential" && shp && shape != 1.0)
      rd.fail(prefix + "_shape", "exponential family has shape 1");
    return make_dist(family, shape, scale, rd, prefix + "_family");
  };
  b.rc_dist = dist("rc", b.rc_dist);
  b.lbrc_dist = dist("lbrc", b.lbrc_dist);

  auto reals = [&](const std::string& key, std::vector<double>& dst) {
    if (const auto* v = get(key)) {
      dst.clear();
      for (const auto& item : split_list(*v)) {
        const double x = rd.real(key, item);
        if (!(x >= 0.0 && x < 1.0)) rd.fail(key, "censoring targets lie in [0, 1)");
        dst.push_back(x);
      }
      if (dst.empty()) rd.fail(key, "empty list");
    }
  };
  auto sizes = [&](const std::string& key, std::vector<int>& dst) {
    if (const auto* v = get(key)) {
      dst.clear();
      for (const auto& item : split_list(*v)) {
        const long long n = rd.integer(key, item);
        if (n < 1 || n > 100000000) rd.fail(key, "sizes must be >= 1");
        dst.push_back(static_cast<int>(n));
      }
      if (dst.empty()) rd.fail(key, "empty list");
    }
  };
  reals("rc_censoring", plan.rc_censoring);
  reals("lbrc_censoring", plan.lbrc_censoring);
  sizes("n_rc", plan.n_rc);
  sizes("n_lbrc", plan.n_lbrc);

  if (const auto* v = get("tau")) {
    b.tau = rd.real("tau", *v);
    if (!(b.tau > 0.0)) rd.fail("tau", "must be positive");
  }
  if (const auto* v = get("basis")) b.basis = BasisSpec::parse(split_list(*v));
  if (const auto* v = get("replications")) {
    const long long r = rd.integer("replications", *v);
    if (r < 1 || r > 100000000) rd.fail("replications", "must be >= 1");
    b.n_replications = static_cast<int>(r);
  }
  if (const auto* v = get("seed")) b.seed = rd.unsigned_integer("seed", *v);
  if (const auto* v = get("estimators")) {
    b.estimators.clear();
    for (const auto& item : split_list(*v)) b.estimators.push_back(parse_estimator(item));
    if (b.estimators.empty()) rd.fail("estimators", "empty list");
  }
  if (const auto* v = get("eval_points")) {
    const long long n = rd.integer("eval_points", *v);
    if (n < 2 || n > 1000000) rd.fail("eval_points", "must be >= 2");
    b.eval_points = static_cast<int>(n);
  }
  if (const auto* v = get("tol")) {
    b.em.tol = rd.real("tol", *v);
    if (!(b.em.tol > 0.0)) rd.fail("tol", "must be positive");
  }
  if (const auto* v = get("max_iters")) {
    const long long n = rd.integer("max_iters", *v);
    if (n < 1 || n > 100000000) rd.fail("max_iters", "must be >= 1");
    b.em.max_iters = static_cast<int>(n);
  }
  if (const auto* v = get("theta_bound")) {
    b.em.theta_bound = rd.real("theta_bound", *v);
    if (!(b.em.theta_bound > 0.0)) rd.fail("theta_bound", "must be positive");
  }
  if (const auto* v = get("threads")) {
    const long long n = rd.integer("threads", *v);
    if (n < 0 || n > 4096) rd.fail("threads", "must be >= 0");
    b.threads = static_cast<int>(n);
  }
  return plan;
}

SimulationPlan read_simulation_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open config file " + path);
  return parse_simulation_config(in, path);
}

std::string format_mean_sd(double mean, double sd) {
  char m[32], s[32];
  if (std::isnan(mean))
    std::snprintf(m, sizeof m, "NA");
  else
    std::snprintf(m, sizeof m, "%.3f", mean);
  if (std::isnan(sd))
    std::snprintf(s, sizeof s, "NA");
  else
    std::snprintf(s, sizeof s, "%.4f", sd);
  return std::string(m) + " (" + s + ")";
}

void write_table_csv(std::ostream& out, const std::vector<Estimator>& estimators,
                     const std::vector<TableRow>& rows) {
  out << "RC %,LBRC %,RC SS,LBRC SS";
  for (Estimator e : estimators) out << ',' << estimator_label(e);
  out << '\n';
  for (const auto& row : rows) {
    out << percent(row.cell.rc_cens_target) << ','
        << percent(row.cell.lbrc_cens_target) << ',' << row.cell.n_rc << ','
        << row.cell.n_lbrc;
    for (Estimator e : estimators) {
      const auto& s = row.result.summary(e);
      out << ',' << format_mean_sd(s.mean_ks, s.sd_ks);
    }
    out << '\n';
  }
}

}  // namespace drmsurv
