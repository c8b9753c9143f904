#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fusioncurve/dataset.hpp"
#include "fusioncurve/eif.hpp"
#include "fusioncurve/nuisance.hpp"

namespace fusioncurve {

/// Sensitivity to unequal transmissibility: R <- clamp(rho * logistic(logit(R) + h_offset), 0, 1).
struct SensitivitySpec {
  double rho = 1.0;
  double h_offset = 0.0;

  bool identity() const { return rho == 1.0 && h_offset == 0.0; }
  double apply(double risk) const;
  /// d apply / d risk, for the delta-method SE.
  double derivative(double risk) const;
};

struct EstimatorConfig {
  int folds = 5;
  std::uint64_t seed = 1;
  std::vector<double> grid;  // empty: deciles of historical event times up to the horizon
  std::vector<Arm> arms{Arm::Investigational};
  std::vector<int> causes{1};
  NuisanceSpec spec;
  std::optional<EifForm> form;  // default: censored for J = 1, competing otherwise
  SensitivitySpec sensitivity;
  double level = 0.95;
  std::size_t band_draws = 1000;
  int threads = 0;
  bool serial = false;     // use the serial reference kernels
  BundleFactory factory;   // overrides fit_bundle (oracle or stub nuisances)
};

struct CurvePoint {
  Arm arm = Arm::Investigational;
  int cause = 1;
  double time = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  double band_lo = 0.0, band_hi = 0.0;
  // isotonic copy, clamped to [0, 1]
  double mono_estimate = 0.0;
  double mono_ci_lo = 0.0, mono_ci_hi = 0.0;
  double mono_band_lo = 0.0, mono_band_hi = 0.0;
};

struct CurveEstimate {
  std::vector<double> grid;
  std::vector<Arm> arms;
  std::vector<int> causes;
  std::vector<CurvePoint> points;     // [arm][cause][time]
  std::vector<double> band_quantile;  // [arm][cause]
  int folds = 0;
  std::uint64_t seed = 0;
  double level = 0.95;
  std::size_t band_draws = 0;
  Truncation truncation;
  SensitivitySpec sensitivity;
  TruncationCounts truncation_counts;
  std::size_t n = 0, n_historical = 0, n_bridging = 0;
  std::vector<std::string> warnings;

  const CurvePoint& at(std::size_t arm, std::size_t cause, std::size_t time) const {
    return points[(arm * causes.size() + cause) * grid.size() + time];
  }
  CurvePoint& at(std::size_t arm, std::size_t cause, std::size_t time) {
    return points[(arm * causes.size() + cause) * grid.size() + time];
  }
  std::size_t arm_index(Arm a) const;
};

struct CurveResult {
  CurveEstimate curve;
  EifMatrix eif;
};

/// Deciles of the observed historical event times up to the horizon.
std::vector<double> default_grid(const FusedDataset& ds);

/// Two-sided normal critical value for `level`.
double normal_critical(double level);

/// K-fold cross-fitted one-step estimates with pointwise CIs, a uniform band
/// per (arm, cause), the isotonic copy and the sensitivity adjustment.
CurveResult estimate_curve(const FusedDataset& ds, const EstimatorConfig& cfg);

struct BandResult {
  std::vector<double> half_width;  // per grid time
  double quantile = 0.0;           // max(sup-statistic quantile, z)
  double sup_quantile = 0.0;
};

/// Studentized Gaussian-multiplier band for one (arm, cause) block.
BandResult uniform_band(const EifMatrix& m, std::size_t arm, std::size_t cause, double level, std::size_t draws,
                        std::uint64_t seed, int threads = 0, bool serial = false);

/// sqrt(mean(phi*^2) / n) for one column.
double eif_standard_error(const EifMatrix& m, std::size_t column);

/// Pool-adjacent-violators projection onto nondecreasing sequences (equal weights).
std::vector<double> isotonic(std::span<const double> y);
void monotone_correct(CurveEstimate& curve);

// ---------------------------------------------------------------------------

struct RelVePoint {
  double time = 0.0;
  double r_approved = 0.0;
  double r_investigational = 0.0;
  double relve = 0.0;
  bool defined = true;               // false when R(1, t) <= 1e-6
  std::optional<double> se_log_relve;  // displayed delta-method variance; absent when R1 == R1'
  std::optional<double> se_log_rr;     // SE of log(R1'/R1)
  double ci_lo = 0.0, ci_hi = 0.0;     // relVE scale, from the log-ratio interval
  bool degenerate = false;
};

struct RelVeEstimate {
  int cause = 1;
  double level = 0.95;
  std::vector<RelVePoint> points;
};

inline constexpr double kDenominatorEpsilon = 1e-6;

/// relVE = 1 - R(1')/R(1) per grid time from an EIF matrix holding both arms.
RelVeEstimate relative_ve(const EifMatrix& m, std::size_t cause_index = 0, double level = 0.95);

struct BootstrapSe {
  std::vector<double> se_log_relve;  // per grid time, over replicates with relVE > 0
  std::vector<double> se_log_rr;     // per grid time, over replicates with R(1') > 0
  std::vector<double> se_relve;
  std::size_t replicates = 0;
  std::size_t failures = 0;
};

/// Nonparametric bootstrap of relVE, resampling within (trial, arm) cells.
BootstrapSe bootstrap_relve(const FusedDataset& ds, const EstimatorConfig& cfg, std::size_t replicates,
                            std::uint64_t seed);

/// Resample rows with replacement within each (trial, arm) cell.
FusedDataset stratified_resample(const FusedDataset& ds, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct NcdeConfig {
  double t_star = 0.0;
  double alpha = 0.05;
  std::size_t bootstrap = 500;
  int min_events = 5;
  EstimatorConfig estimator;  // grid, arms and bridging arm are set internally
};

struct NcdeTestResult {
  double t_star = 0.0;
  double counterfactual = 0.0;
  double actual = 0.0;
  double difference = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  double alpha = 0.05;
  std::size_t bootstrap = 0;
  std::size_t failures = 0;
  bool reject = false;
};

/// No-controlled-direct-effects test on one trial where both arms carry
/// outcomes. Arm 1 rows play the historical trial, arm 1' rows the bridging
/// study with outcomes hidden; the counterfactual incidence of arm 1' is
/// compared with its IPCW actual incidence.
NcdeTestResult ncde_test(std::span<const SubjectRecord> rows, int causes, double horizon, const NcdeConfig& cfg);

/// IPCW incidence of cause 1 by t among the given rows, censoring model fitted on the same rows.
double ipcw_incidence(std::span<const SubjectRecord> rows, double t, const FeatureSpec& censoring, double floor);

// ---------------------------------------------------------------------------

enum class Scenario { AllCorrect, Ma, Mb, Mc, NoneCorrect };

std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& text);

/// Nuisance specs for a robustness scenario given the correct specs; "wrong"
/// means intercept-only.
///   Ma: event model and bridging marker density correct
///   Mb: event model and bridging arm propensity correct
///   Mc: everything except the event model correct
NuisanceSpec scenario_spec(Scenario s, const NuisanceSpec& correct);

}  // namespace fusioncurve
