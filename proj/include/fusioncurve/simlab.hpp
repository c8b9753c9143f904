#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fusioncurve/dataset.hpp"
#include "fusioncurve/estimator.hpp"
#include "fusioncurve/nuisance.hpp"

namespace fusioncurve::sim {

inline constexpr std::size_t kDim = 6;
inline constexpr double kAdminCensoring = 5.5;

struct DgpConfig {
  double c = 0.0;
  std::size_t n_h = 2000;
  std::size_t n_b = 500;
  std::uint64_t seed = 1;
  int causes = 1;
};

/// Default study sizes: n_b = n_h / 4.
DgpConfig standard_config(std::size_t n_h, double c, std::uint64_t seed);

// Closed-form pieces of the generating process.
std::vector<double> covariate_mean(double c);
double historical_marker_mean(std::span<const double> x, Arm a);
double bridging_marker_mean(std::span<const double> x, Arm a);
/// Log-hazard exponent of cause 1; cause k uses 0.5^(k-1) times it, evaluated
/// at marker coordinate k (one marker per cause, iid noise around a shared mean).
double event_exponent(std::span<const double> x, bool approved, double s);
double event_rate(std::span<const double> x, bool approved, double s, int cause);
double censoring_rate(std::span<const double> x, double s);

/// Draws the fused sample; administrative censoring at 5.5 caps follow-up.
FusedDataset generate(const DgpConfig& cfg);

/// Feature specs matching the generating process.
NuisanceSpec correct_spec();

struct OracleValue {
  double value = 0.0;
  double mc_se = 0.0;
};

/// Monte Carlo of the mediation functional: X from the bridging law, S from
/// the bridging arm-a law, the event law of the historical approved arm. The
/// conditional risk is integrated exactly given (X, S). cause 0 = all-cause.
std::vector<OracleValue> oracle_curve(double c, int causes, Arm a, std::span<const double> times, int cause,
                                      std::size_t draws, std::uint64_t seed);
OracleValue oracle_truth(double c, int causes, Arm a, double t, int cause, std::size_t draws, std::uint64_t seed);

/// The true nuisance functions of the generating process.
class OracleNuisance final : public Nuisance {
 public:
  OracleNuisance(const DgpConfig& cfg, Truncation truncation = Truncation::none(), double step = 0.01,
                 std::size_t nodes = 32);
  int causes() const override { return causes_; }
  double kappa() const override { return kappa_; }
  Truncation truncation() const override { return truncation_; }
  double prob_bridging(std::span<const double>) const override { return kappa_; }
  double prob_historical_approved(std::span<const double>) const override { return 0.5 * (1.0 - kappa_); }
  double prob_arm_bridging(Arm a, std::span<const double>) const override { return a == Arm::Placebo ? 0.0 : 0.5; }
  double marker_density(std::span<const double> s, std::span<const double> x, Trial trial, Arm a) const override;
  MarkerNodes marker_nodes(std::span<const double> x, Arm a) const override;
  /// Piecewise-constant discretization of the exponential hazards on a grid of width `step`.
  EventCurve event_curve(std::span<const double> x, std::span<const double> s) const override;
  void event_cif(std::span<const double> x, std::span<const double> s, int cause, std::span<const double> times,
                 std::span<double> out) const override;
  double censoring_survival_before(double u, std::span<const double> x, std::span<const double> s) const override;

 private:
  int causes_ = 1;
  double kappa_ = 0.2;
  Truncation truncation_;
  std::vector<double> jumps_;
  std::vector<double> gh_nodes_, gh_weights_;
};

/// Bundle factory handing every fold the oracle.
BundleFactory oracle_factory(const DgpConfig& cfg, Truncation truncation = Truncation::none());

// ---------------------------------------------------------------------------

struct Scenario {
  std::size_t n_h = 2000;
  double c = 0.0;
};

struct SummaryRow {
  std::size_t n_h = 0;
  double c = 0.0;
  double truth = 0.0;  // survival scale
  double mean = 0.0, median = 0.0, bias = 0.0, pct_bias = 0.0, rmse = 0.0, avg_se = 0.0;
  double coverage = 0.0;
  std::size_t replications = 0;
  std::size_t failures = 0;
};

struct StudyConfig {
  std::size_t replications = 500;
  std::uint64_t seed = 1;
  double t = 5.0;
  Arm arm = Arm::Investigational;
  std::size_t truth_draws = 1'000'000;
  int threads = 0;
  EstimatorConfig estimator;  // grid, arms and causes are overwritten
};

/// Generates, estimates at t on the survival scale, and aggregates per scenario.
std::vector<SummaryRow> run_study(std::span<const Scenario> scenarios, const StudyConfig& cfg);

/// Aggregates survival-scale estimates (failures excluded by the caller).
SummaryRow summarize(std::span<const double> estimates, std::span<const double> ses,
                     std::span<const unsigned char> covered, double truth);

/// The standard 4 x 4 grid of (n_h, c).
std::vector<Scenario> standard_scenarios();

struct MisspecRow {
  fusioncurve::Scenario scenario = fusioncurve::Scenario::AllCorrect;
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double mc_se = 0.0;
  std::size_t replications = 0;
  std::size_t failures = 0;
};

/// Bias of the survival-scale estimate per robustness scenario; every scenario
/// sees the same simulated datasets.
std::vector<MisspecRow> misspecification_suite(const Scenario& where, std::span<const fusioncurve::Scenario> scenarios,
                                               const StudyConfig& cfg);

struct BandStudy {
  std::size_t replications = 0;
  std::size_t failures = 0;
  double coverage = 0.0;            // band covers the whole true curve
  double pointwise_coverage = 0.0;  // averaged over grid times
  std::size_t band_inside_ci_violations = 0;
};

/// Simultaneous coverage of the incidence curve on `grid` by the uniform band.
BandStudy band_study(const Scenario& where, std::span<const double> grid, const StudyConfig& cfg);

// ---------------------------------------------------------------------------

/// Single trial with outcomes in both arms 1 and 1'. The event law is the
/// approved-arm law at (x, s), multiplied by exp(direct_effect) in arm 1'.
struct NcdeDgp {
  std::size_t n = 2000;
  double c = 0.0;
  double direct_effect = 0.0;
  std::uint64_t seed = 1;
};

std::vector<SubjectRecord> generate_ncde(const NcdeDgp& dgp);

struct NcdeStudy {
  std::size_t replications = 0;
  std::size_t failures = 0;
  double rejection_rate = 0.0;
  double mc_se = 0.0;
};

NcdeStudy ncde_study(const NcdeDgp& dgp, std::size_t replications, const NcdeConfig& cfg, std::uint64_t seed,
                     int threads);

}  // namespace fusioncurve::sim
