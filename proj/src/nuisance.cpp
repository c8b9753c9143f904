#include "fusioncurve/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fusioncurve/error.hpp"
#include "fusioncurve/quadrature.hpp"
#include "fusioncurve/rng.hpp"

namespace fusioncurve {

void Nuisance::event_cif(std::span<const double> x, std::span<const double> s, int cause,
                         std::span<const double> times, std::span<double> out) const {
  const EventCurve curve = event_curve(x, s);
  for (std::size_t i = 0; i < times.size(); ++i) out[i] = curve.cif(cause, times[i]);
}

void Nuisance::censoring_survival_before_many(std::span<const double> u, std::span<const double> x,
                                             std::span<const double> s, std::span<double> out) const {
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = censoring_survival_before(u[i], x, s);
}

NuisanceSpec NuisanceSpec::defaults(std::size_t dim) {
  NuisanceSpec spec;
  spec.gamma_propensity = FeatureSpec::linear(dim);
  spec.historical_approved_propensity = FeatureSpec::linear(dim);
  spec.arm_propensity = FeatureSpec::linear(dim);
  spec.marker_historical = FeatureSpec::linear(dim);
  spec.marker_bridging = FeatureSpec::linear(dim);
  std::string hazard;
  for (std::size_t j = 0; j < dim; ++j) hazard += "x" + std::to_string(j + 1) + ",";
  hazard += "s,a";
  spec.event = {FeatureSpec::parse(hazard)};
  spec.censoring = FeatureSpec::parse(hazard);
  return spec;
}

const FeatureSpec& NuisanceSpec::event_spec(int cause) const {
  if (event.empty()) throw Error(ErrorCode::InvalidArgument, "no event feature spec configured");
  if (event.size() == 1) return event.front();
  if (cause < 1 || static_cast<std::size_t>(cause) > event.size())
    throw Error(ErrorCode::CauseOutOfRange, "no event feature spec for cause " + std::to_string(cause));
  return event[static_cast<std::size_t>(cause - 1)];
}

FittedNuisance::FittedNuisance(std::span<const SubjectRecord> records, std::span<const std::size_t> training_rows,
                               double kappa, int causes, const NuisanceSpec& spec, std::optional<int> held_out)
    : spec_(spec), causes_(causes), kappa_(kappa), held_out_(held_out) {
  gamma_ = fit_binary(BinaryTarget::GammaGivenX, records, training_rows, spec.gamma_propensity);
  hist_approved_ = fit_binary(BinaryTarget::ArmAndGamma0GivenX, records, training_rows,
                              spec.historical_approved_propensity);

  std::size_t bridge_counts[3] = {0, 0, 0};
  std::size_t hist_counts[3] = {0, 0, 0};
  for (std::size_t i : training_rows) {
    const auto& r = records[i];
    (r.bridging() ? bridge_counts : hist_counts)[static_cast<int>(r.arm)]++;
  }
  const bool two_bridging_arms = bridge_counts[1] > 0 && bridge_counts[2] > 0;
  if (two_bridging_arms) {
    arm_ = fit_binary(BinaryTarget::ArmGivenXBridging, records, training_rows, spec.arm_propensity);
  } else {
    only_bridging_arm_ = bridge_counts[2] > 0 ? Arm::Investigational : Arm::Approved;
  }
  for (int a = 0; a < 3; ++a) {
    if (hist_counts[a] > 0)
      densities_.emplace(std::make_pair(0, a), fit_conditional_density(Trial::Historical, static_cast<Arm>(a), records,
                                                                      training_rows, spec.marker_historical));
    if (bridge_counts[a] > 0)
      densities_.emplace(std::make_pair(1, a), fit_conditional_density(Trial::Bridging, static_cast<Arm>(a), records,
                                                                      training_rows, spec.marker_bridging));
  }
  for (int k = 1; k <= causes_; ++k)
    events_.push_back(fit_survival(SurvivalKind::Event, k, records, training_rows, spec.event_spec(k)));
  censoring_ = fit_survival(SurvivalKind::Censoring, 0, records, training_rows, spec.censoring);

  if (causes_ == 1) {
    const auto rule = gauss_hermite(spec.quadrature_nodes);
    gh_nodes_ = rule.nodes;
    gh_weights_ = rule.weights;
  } else {
    Engine eng(derive_seed(spec.mc_seed, {static_cast<std::uint64_t>(held_out.value_or(0))}));
    std::normal_distribution<double> normal;
    mc_normals_.resize(spec.mc_draws * static_cast<std::size_t>(causes_));
    for (auto& z : mc_normals_) z = normal(eng);
  }
}

double FittedNuisance::prob_bridging(std::span<const double> x) const {
  return gamma_.predict(x, spec_.truncation.propensity);
}

double FittedNuisance::prob_historical_approved(std::span<const double> x) const {
  return hist_approved_.predict(x, spec_.truncation.propensity);
}

double FittedNuisance::prob_arm_bridging(Arm a, std::span<const double> x) const {
  if (!arm_) return a == only_bridging_arm_ ? 1.0 : 0.0;
  const double p = arm_->predict(x, spec_.truncation.propensity);
  if (a == Arm::Investigational) return p;
  if (a == Arm::Approved) return 1.0 - p;
  return 0.0;
}

const ConditionalDensityFit& FittedNuisance::density_model(Trial trial, Arm a) const {
  auto it = densities_.find({static_cast<int>(trial), static_cast<int>(a)});
  if (it == densities_.end())
    throw Error(ErrorCode::NoArmRows, "no marker-density fit for arm " + std::string(arm_code(a)) + " in the " +
                                          (trial == Trial::Historical ? "historical" : "bridging") + " study");
  return it->second;
}

double FittedNuisance::marker_density(std::span<const double> s, std::span<const double> x, Trial trial,
                                      Arm a) const {
  return density_model(trial, a).density(s, x);
}

MarkerNodes FittedNuisance::marker_nodes(std::span<const double> x, Arm a) const {
  const auto& fit = density_model(Trial::Bridging, a);
  MarkerNodes nodes;
  nodes.dim = static_cast<std::size_t>(causes_);
  if (causes_ == 1) {
    const double m = fit.mean(x, 0);
    const double sd = fit.sigma[0];
    nodes.points.resize(gh_nodes_.size());
    for (std::size_t i = 0; i < gh_nodes_.size(); ++i) nodes.points[i] = m + sd * gh_nodes_[i];
    nodes.weights = gh_weights_;
    return nodes;
  }
  const std::size_t draws = spec_.mc_draws;
  const std::size_t J = static_cast<std::size_t>(causes_);
  std::vector<double> means(J);
  for (std::size_t k = 0; k < J; ++k) means[k] = fit.mean(x, k);
  nodes.points.resize(draws * J);
  for (std::size_t i = 0; i < draws; ++i)
    for (std::size_t k = 0; k < J; ++k) nodes.points[i * J + k] = means[k] + fit.sigma[k] * mc_normals_[i * J + k];
  nodes.weights.assign(draws, 1.0 / static_cast<double>(draws));
  return nodes;
}

EventCurve FittedNuisance::event_curve(std::span<const double> x, std::span<const double> s) const {
  const std::size_t J = static_cast<std::size_t>(causes_);
  if (J == 1) {
    const auto& fit = events_.front();
    const double scale = std::exp(fit.linear_predictor(x, s, true));
    std::vector<double> inc(fit.baseline_increments.size());
    for (std::size_t i = 0; i < inc.size(); ++i) inc[i] = fit.baseline_increments[i] * scale;
    return EventCurve::from_cumulative_increments(fit.jump_times, 1, inc);
  }
  std::vector<double> times;
  for (const auto& fit : events_) times.insert(times.end(), fit.jump_times.begin(), fit.jump_times.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::vector<double> inc(times.size() * J, 0.0);
  for (std::size_t k = 0; k < J; ++k) {
    const auto& fit = events_[k];
    const double scale = std::exp(fit.linear_predictor(x, s, true));
    std::size_t pos = 0;
    for (std::size_t i = 0; i < fit.jump_times.size(); ++i) {
      while (times[pos] < fit.jump_times[i]) ++pos;
      inc[pos * J + k] = fit.baseline_increments[i] * scale;
    }
  }
  return EventCurve::from_cumulative_increments(std::move(times), J, inc);
}

void FittedNuisance::event_cif(std::span<const double> x, std::span<const double> s, int cause,
                               std::span<const double> times, std::span<double> out) const {
  if (cause < 1 || cause > causes_) throw Error(ErrorCode::CauseOutOfRange, "cause out of range");
  if (causes_ > 1) {
    Nuisance::event_cif(x, s, cause, times, out);
    return;
  }
  const auto& fit = events_.front();
  const double scale = std::exp(fit.linear_predictor(x, s, true));
  for (std::size_t i = 0; i < times.size(); ++i) out[i] = -std::expm1(-fit.baseline(times[i]) * scale);
}

double FittedNuisance::censoring_survival_before(double u, std::span<const double> x,
                                                 std::span<const double> s) const {
  return censoring_.survival_before(u, x, s, true);
}

void FittedNuisance::censoring_survival_before_many(std::span<const double> u, std::span<const double> x,
                                                   std::span<const double> s, std::span<double> out) const {
  const double risk = std::exp(censoring_.linear_predictor(x, s, true));
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::exp(-censoring_.baseline_before(u[i]) * risk);
}

std::vector<int> make_folds(const FusedDataset& ds, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::InvalidArgument, "cross-fitting needs K >= 2 folds");
  std::vector<std::size_t> cells[2][3];
  for (std::size_t i = 0; i < ds.size(); ++i)
    cells[static_cast<int>(ds[i].trial)][static_cast<int>(ds[i].arm)].push_back(i);
  std::vector<int> out(ds.size(), 0);
  for (int g = 0; g < 2; ++g) {
    for (int a = 0; a < 3; ++a) {
      auto& idx = cells[g][a];
      if (idx.empty()) continue;
      if (idx.size() < static_cast<std::size_t>(folds))
        throw Error(ErrorCode::CellTooSmall, "cell (trial " + std::to_string(g) + ", arm " +
                                                 std::string(arm_code(static_cast<Arm>(a))) + ") has fewer rows than folds");
      Engine eng(derive_seed(seed, {static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(a)}));
      std::shuffle(idx.begin(), idx.end(), eng);
      for (std::size_t p = 0; p < idx.size(); ++p) out[idx[p]] = static_cast<int>(p % static_cast<std::size_t>(folds)) + 1;
    }
  }
  return out;
}

std::shared_ptr<const Nuisance> fit_bundle(const FusedDataset& ds, std::span<const int> folds, int fold,
                                           const NuisanceSpec& spec) {
  std::vector<std::size_t> training;
  training.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (folds[i] != fold) training.push_back(i);
  return std::make_shared<FittedNuisance>(ds.records(), training, ds.kappa(), ds.causes(), spec, fold);
}

}  // namespace fusioncurve
