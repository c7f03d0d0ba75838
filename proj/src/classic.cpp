#include "drmsurv/classic.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

namespace drmsurv {

namespace {

struct EventTable {
  std::vector<double> times;  // unique event times, increasing
  std::vector<int> deaths;
};

EventTable tabulate_events(const ObservedSample& sample) {
  std::vector<double> ev;
  for (std::size_t i = 0; i < sample.size(); ++i)
    if (sample.status()[i] == 1) ev.push_back(sample.times()[i]);
  if (ev.empty())
    throw Error(ErrorKind::NoEvents, "no events: every observation is censored");
  std::sort(ev.begin(), ev.end());
  EventTable tab;
  for (double t : ev) {
    if (tab.times.empty() || tab.times.back() != t) {
      tab.times.push_back(t);
      tab.deaths.push_back(0);
    }
    ++tab.deaths.back();
  }
  return tab;
}

SurvivalCurve product_limit(const EventTable& tab,
                            const std::vector<double>& at_risk) {
  const auto k = static_cast<Eigen::Index>(tab.times.size());
  Eigen::VectorXd points(k), masses(k);
  double surv = 1.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto u = static_cast<std::size_t>(j);
    const double next = surv * (1.0 - tab.deaths[u] / at_risk[u]);
    points(j) = tab.times[u];
    masses(j) = std::max(surv - next, 0.0);
    surv = next;
  }
  return SurvivalCurve(std::move(points), std::move(masses));
}

// Number of values >= t in a sorted vector.
double count_at_least(const std::vector<double>& sorted, double t) {
  return static_cast<double>(
      sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
}

}  // namespace

SurvivalCurve fit_ecdf(const ObservedSample& sample) {
  if (sample.scheme() != Scheme::IID)
    throw Error(ErrorKind::InvalidInput, "ECDF needs an IID sample");
  const EventTable tab = tabulate_events(sample);
  const auto k = static_cast<Eigen::Index>(tab.times.size());
  Eigen::VectorXd points(k), masses(k);
  const double n = static_cast<double>(sample.size());
  for (Eigen::Index j = 0; j < k; ++j) {
    points(j) = tab.times[static_cast<std::size_t>(j)];
    masses(j) = tab.deaths[static_cast<std::size_t>(j)] / n;
  }
  return SurvivalCurve(std::move(points), std::move(masses));
}

SurvivalCurve fit_km(const ObservedSample& sample) {
  if (sample.scheme() != Scheme::RC && sample.scheme() != Scheme::IID)
    throw Error(ErrorKind::InvalidInput,
                "Kaplan-Meier needs a right-censored sample");
  const EventTable tab = tabulate_events(sample);
  std::vector<double> sorted = sample.times();
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> at_risk;
  at_risk.reserve(tab.times.size());
  for (double t : tab.times) at_risk.push_back(count_at_least(sorted, t));
  return product_limit(tab, at_risk);
}

SurvivalCurve fit_km_ltrc(const ObservedSample& sample) {
  if (!sample.entries())
    throw Error(ErrorKind::InvalidInput,
                "truncation-adjusted Kaplan-Meier needs entry times");
  const EventTable tab = tabulate_events(sample);
  std::vector<double> exits = sample.times();
  std::vector<double> entries = *sample.entries();
  std::sort(exits.begin(), exits.end());
  std::sort(entries.begin(), entries.end());

  std::vector<double> at_risk;
  at_risk.reserve(tab.times.size());
  for (double t : tab.times) {
    // A_i < X_i, so {A_i >= t} is contained in {X_i >= t}.
    const double r = count_at_least(exits, t) - count_at_least(entries, t);
    if (r <= 0.0) {
      std::ostringstream os;
      os << "nonidentifiable risk set: nobody at risk at event time " << t;
      throw Error(ErrorKind::NonidentifiableRiskSet, os.str());
    }
    at_risk.push_back(r);
  }
  return product_limit(tab, at_risk);
}

}  // namespace drmsurv
