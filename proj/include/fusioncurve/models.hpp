#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fusioncurve/dataset.hpp"
#include "fusioncurve/features.hpp"

namespace fusioncurve {

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticModel {
  std::vector<double> coefficients;  // intercept first
  int iterations = 0;
  double max_score = 0.0;  // max |mean score| at the returned coefficients

  double linear_predictor(std::span<const double> features) const;
};

/// Newton-Raphson maximum likelihood. `design` is row-major n x p without the
/// intercept column. Converges when the mean score max-norm drops below 1e-8
/// (at most 100 iterations).
LogisticModel fit_logistic(std::span<const double> design, std::size_t p, std::span<const int> labels);

enum class BinaryTarget { GammaGivenX, ArmGivenXBridging, ArmAndGamma0GivenX };

struct BinaryModelFit {
  BinaryTarget target = BinaryTarget::GammaGivenX;
  FeatureSpec spec;
  LogisticModel model;

  /// P(label = 1 | x) clamped to [p_min, 1 - p_min].
  double predict(std::span<const double> x, double p_min = 0.01) const;
};

/// Labels: GammaGivenX -> Gamma=1 over all rows; ArmGivenXBridging -> A=1' over
/// bridging rows; ArmAndGamma0GivenX -> (A=1, Gamma=0) over all rows.
BinaryModelFit fit_binary(BinaryTarget target, std::span<const SubjectRecord> records,
                          std::span<const std::size_t> rows, const FeatureSpec& spec);

// ---------------------------------------------------------------------------
// Linear-Gaussian marker density

inline constexpr double kSigmaMin = 1e-6;

struct ConditionalDensityFit {
  Trial trial = Trial::Historical;
  Arm arm = Arm::Approved;
  FeatureSpec spec;
  std::vector<std::vector<double>> coefficients;  // per marker coordinate, intercept first
  std::vector<double> sigma;                      // per marker coordinate

  double mean(std::span<const double> x, std::size_t coordinate) const;
  /// Product of independent Gaussian densities over marker coordinates.
  double density(std::span<const double> s, std::span<const double> x) const;
};

/// OLS on the rows of the (trial, arm) stratum; sigma is the dof-corrected RMS
/// residual floored at kSigmaMin.
ConditionalDensityFit fit_conditional_density(Trial trial, Arm arm, std::span<const SubjectRecord> records,
                                              std::span<const std::size_t> rows, const FeatureSpec& spec);

// ---------------------------------------------------------------------------
// Proportional hazards

enum class SurvivalKind { Event, Censoring };

struct SurvivalFit {
  SurvivalKind kind = SurvivalKind::Event;
  int cause = 1;  // modeled cause for Event; 0 for Censoring
  FeatureSpec spec;
  std::vector<double> coefficients;
  std::vector<double> centers;  // feature means used to center the linear predictor
  std::vector<double> jump_times;
  std::vector<double> baseline_increments;  // Breslow dL0 at jump_times
  std::vector<double> baseline_cumulative;
  int iterations = 0;

  /// Centered linear predictor at (x, s, arm indicator).
  double linear_predictor(std::span<const double> x, std::span<const double> s, bool approved) const;
  /// Baseline cumulative hazard at t (right-continuous) and at t- (left limit).
  double baseline(double t) const;
  double baseline_before(double t) const;
  double survival(double t, std::span<const double> x, std::span<const double> s, bool approved) const;
  double survival_before(double t, std::span<const double> x, std::span<const double> s, bool approved) const;
};

/// Partial-likelihood Newton fit with Breslow ties and the Breslow baseline.
/// Event kind models delta == cause; Censoring models delta == 0, with events
/// tied at a censoring time leaving the censoring risk set first.
SurvivalFit fit_survival(SurvivalKind kind, int cause, std::span<const SubjectRecord> records,
                         std::span<const std::size_t> rows, const FeatureSpec& spec);

}  // namespace fusioncurve
