#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fusioncurve/dataset.hpp"
#include "fusioncurve/event_curve.hpp"
#include "fusioncurve/features.hpp"
#include "fusioncurve/models.hpp"

namespace fusioncurve {

/// Floors and caps applied wherever a nuisance value is used as a divisor.
struct Truncation {
  double propensity = 0.01;
  double censoring = 0.05;
  double density_ratio = 50.0;

  static Truncation none() { return {0.0, 0.0, std::numeric_limits<double>::infinity()}; }
};

/// Quadrature nodes for integrating over the bridging marker law f(s | x, a, Gamma=1).
struct MarkerNodes {
  std::size_t dim = 1;
  std::vector<double> points;  // node-major, dim values per node
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const { return {points.data() + i * dim, dim}; }
};

/// Every nuisance function the identification formulas and EIFs use. The event
/// law is always the historical approved-arm law at (x, s).
class Nuisance {
 public:
  virtual ~Nuisance() = default;

  virtual int causes() const = 0;
  /// P(Gamma = 1)
  virtual double kappa() const = 0;
  virtual Truncation truncation() const = 0;

  /// f(Gamma = 1 | x)
  virtual double prob_bridging(std::span<const double> x) const = 0;
  /// f(A = 1, Gamma = 0 | x)
  virtual double prob_historical_approved(std::span<const double> x) const = 0;
  /// f(A = a | x, Gamma = 1)
  virtual double prob_arm_bridging(Arm a, std::span<const double> x) const = 0;
  /// f(s | x, A = a, Gamma = trial)
  virtual double marker_density(std::span<const double> s, std::span<const double> x, Trial trial,
                                Arm a) const = 0;
  virtual MarkerNodes marker_nodes(std::span<const double> x, Arm a) const = 0;

  virtual EventCurve event_curve(std::span<const double> x, std::span<const double> s) const = 0;
  /// F^{T,j}(t | x, 1, s) for each t (sorted ascending).
  virtual void event_cif(std::span<const double> x, std::span<const double> s, int cause,
                         std::span<const double> times, std::span<double> out) const;
  /// G^C(u- | x, 1, s)
  virtual double censoring_survival_before(double u, std::span<const double> x,
                                           std::span<const double> s) const = 0;
  /// Batch form over sorted times.
  virtual void censoring_survival_before_many(std::span<const double> u, std::span<const double> x,
                                              std::span<const double> s, std::span<double> out) const;

  /// Fold excluded from training, when cross-fitted.
  virtual std::optional<int> held_out_fold() const { return std::nullopt; }
};

struct NuisanceSpec {
  FeatureSpec gamma_propensity;
  FeatureSpec historical_approved_propensity;
  FeatureSpec arm_propensity;
  FeatureSpec marker_historical;
  FeatureSpec marker_bridging;
  std::vector<FeatureSpec> event;  // one per cause, or a single spec shared by all causes
  FeatureSpec censoring;
  Truncation truncation;
  std::size_t quadrature_nodes = 32;
  std::size_t mc_draws = 256;
  std::uint64_t mc_seed = 20240917;

  /// Linear covariate models everywhere; event and censoring on x, s and a.
  static NuisanceSpec defaults(std::size_t dim);
  const FeatureSpec& event_spec(int cause) const;
};

/// Parametric nuisance bundle trained on a subset of rows.
class FittedNuisance final : public Nuisance {
 public:
  FittedNuisance(std::span<const SubjectRecord> records, std::span<const std::size_t> training_rows,
                 double kappa, int causes, const NuisanceSpec& spec, std::optional<int> held_out = std::nullopt);

  int causes() const override { return causes_; }
  double kappa() const override { return kappa_; }
  Truncation truncation() const override { return spec_.truncation; }
  double prob_bridging(std::span<const double> x) const override;
  double prob_historical_approved(std::span<const double> x) const override;
  double prob_arm_bridging(Arm a, std::span<const double> x) const override;
  double marker_density(std::span<const double> s, std::span<const double> x, Trial trial, Arm a) const override;
  MarkerNodes marker_nodes(std::span<const double> x, Arm a) const override;
  EventCurve event_curve(std::span<const double> x, std::span<const double> s) const override;
  void event_cif(std::span<const double> x, std::span<const double> s, int cause, std::span<const double> times,
                 std::span<double> out) const override;
  double censoring_survival_before(double u, std::span<const double> x, std::span<const double> s) const override;
  void censoring_survival_before_many(std::span<const double> u, std::span<const double> x,
                                      std::span<const double> s, std::span<double> out) const override;
  std::optional<int> held_out_fold() const override { return held_out_; }

  const BinaryModelFit& gamma_model() const { return gamma_; }
  const std::optional<BinaryModelFit>& arm_model() const { return arm_; }
  const BinaryModelFit& historical_approved_model() const { return hist_approved_; }
  const SurvivalFit& event_model(int cause) const { return events_.at(static_cast<std::size_t>(cause - 1)); }
  const SurvivalFit& censoring_model() const { return censoring_; }
  const ConditionalDensityFit& density_model(Trial trial, Arm a) const;

 private:
  NuisanceSpec spec_;
  int causes_ = 1;
  double kappa_ = 0.5;
  std::optional<int> held_out_;
  BinaryModelFit gamma_;
  BinaryModelFit hist_approved_;
  std::optional<BinaryModelFit> arm_;  // absent when the bridging study has one arm
  Arm only_bridging_arm_ = Arm::Approved;
  std::map<std::pair<int, int>, ConditionalDensityFit> densities_;
  std::vector<SurvivalFit> events_;
  SurvivalFit censoring_;
  std::vector<double> gh_nodes_, gh_weights_;
  std::vector<double> mc_normals_;
};

/// Per-row fold ids in 1..K, stratified by (trial, arm) and seeded.
std::vector<int> make_folds(const FusedDataset& ds, int folds, std::uint64_t seed);

std::shared_ptr<const Nuisance> fit_bundle(const FusedDataset& ds, std::span<const int> folds, int fold,
                                           const NuisanceSpec& spec);

/// Produces the nuisance bundle for one fold (fitted, oracle, or stub).
using BundleFactory =
    std::function<std::shared_ptr<const Nuisance>(const FusedDataset&, std::span<const int>, int)>;

}  // namespace fusioncurve
