#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fusioncurve/dataset.hpp"
#include "fusioncurve/estimator.hpp"
#include "fusioncurve/simlab.hpp"

namespace fusioncurve {

/// Everything a CLI run needs. Loaded from an INI file:
///
///   [data]        historical, bridging, outcome, covariates, arm, markers, time, event, horizon, trim
///   [estimate]    folds, seed, grid, arms, causes, level, band_draws, form
///   [models]      gamma, historical_approved, arm, marker_historical, marker_bridging,
///                 event (or event1, event2, ...), censoring, quadrature_nodes, mc_draws, mc_seed
///   [truncation]  propensity, censoring, density_ratio
///   [sensitivity] rho, h_offset
///   [relve]       bootstrap
///   [ncde]        t_star, alpha, bootstrap, min_events
///   [simulate]    scenarios, replications, t, truth_draws
///   [output]      dir
///
/// Relative paths are taken relative to the config file. Unknown keys are errors.
struct RunConfig {
  std::filesystem::path historical, bridging, outcome;
  CsvSchema schema;
  std::optional<double> horizon;  // default: last observed time
  bool trim = false;

  EstimatorConfig estimator;
  bool grid_given = false;
  std::size_t relve_bootstrap = 0;
  NcdeConfig ncde;
  bool t_star_given = false;

  std::vector<sim::Scenario> scenarios = sim::standard_scenarios();
  sim::StudyConfig study;

  std::filesystem::path out = "fusioncurve-out";
  int threads = 0;
};

/// Parses INI text; `base` resolves relative paths.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& path);

std::vector<double> parse_number_list(const std::string& text);
std::vector<Arm> parse_arm_list(const std::string& text);
/// "1000:0,2000:0.25"
std::vector<sim::Scenario> parse_scenarios(const std::string& text);

}  // namespace fusioncurve
