#ifndef DRMSURV_SCENARIO_CONFIG_HPP_
#define DRMSURV_SCENARIO_CONFIG_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "drmsurv/simulate.hpp"

namespace drmsurv {

/// A simulation table: shared settings plus the censoring/size levels whose
/// every combination forms one row. See docs/simulation_config.md.
struct SimulationPlan {
  ScenarioConfig base;
  std::vector<double> rc_censoring{0.15};
  std::vector<double> lbrc_censoring{0.15};
  std::vector<int> n_rc{50};
  std::vector<int> n_lbrc{50};

  /// Rows in table order: RC % varies fastest, then RC size, LBRC %, LBRC size.
  std::vector<ScenarioConfig> cells() const;
};

SimulationPlan parse_simulation_config(std::istream& in,
                                       const std::string& source = "<config>");
SimulationPlan read_simulation_config(const std::string& path);

struct TableRow {
  ScenarioConfig cell;
  ScenarioResult result;
};

/// "mean (sd)" with three and four decimals; NA where undefined.
std::string format_mean_sd(double mean, double sd);

/// CSV with columns RC %, LBRC %, RC SS, LBRC SS, then one per estimator.
void write_table_csv(std::ostream& out, const std::vector<Estimator>& estimators,
                     const std::vector<TableRow>& rows);

}  // namespace drmsurv

#endif  // DRMSURV_SCENARIO_CONFIG_HPP_
