#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fusioncurve/dataset.hpp"
#include "fusioncurve/nuisance.hpp"

namespace fusioncurve {

/// Which influence-function display to evaluate.
///   Complete  - uncensored data, y = I{T <= t, Delta = j}
///   Censored  - single endpoint, survival-scale form (J = 1 only)
///   Competing - cause-j form with the h^k(t,u) kernel (any J)
enum class EifForm { Complete, Censored, Competing };

/// How often a divisor hit its floor (or the density ratio its cap).
struct TruncationCounts {
  std::size_t propensity = 0;
  std::size_t censoring = 0;
  std::size_t density_ratio = 0;
  std::size_t weights = 0;  // number of weight evaluations

  TruncationCounts& operator+=(const TruncationCounts& o);
};

/// The three additive pieces of the uncentered influence value.
struct EifTerms {
  double weighting = 0.0;  // historical approved rows only
  double residual = 0.0;   // bridging arm-a rows only: mu(S) - int mu f
  double integral = 0.0;   // bridging rows only: int mu f / kappa
  double total() const { return weighting + residual + integral; }
};

/// Uncentered influence values phi for one row at every (cause, time):
/// out[c * grid.size() + i] for causes[c], grid[i]. The estimate is the mean
/// of phi; the mean-zero version is phi - Gamma * R / kappa.
void eif_row(const Nuisance& nu, const SubjectRecord& r, Arm a, std::span<const double> grid,
             std::span<const int> causes, EifForm form, std::span<double> out,
             TruncationCounts* counts = nullptr);

EifTerms eif_terms(const Nuisance& nu, const SubjectRecord& r, Arm a, double t, int cause, EifForm form);

double eif_censored_row(const Nuisance& nu, const SubjectRecord& r, Arm a, double t);
double eif_competing_row(const Nuisance& nu, const SubjectRecord& r, Arm a, double t, int cause);
double eif_complete_row(const Nuisance& nu, const SubjectRecord& r, Arm a, double t, int cause = 1);

/// Throws FoldMismatch when a cross-fitted bundle is applied to a row of
/// another fold.
void check_fold(const Nuisance& nu, int row_fold);

/// Default form for a J-cause analysis.
inline EifForm default_form(int causes) { return causes == 1 ? EifForm::Censored : EifForm::Competing; }

// ---------------------------------------------------------------------------
// Plug-in functionals

struct PluginEstimate {
  double value = 0.0;
  double se = 0.0;  // sample SD of the summands over sqrt(#summands)
  std::vector<std::string> warnings;
};

/// cause 0 means all-cause (1 - G) in the three plug-ins below.
PluginEstimate plugin_mediation(const Nuisance& nu, const FusedDataset& ds, Arm a, double t, int cause = 1);
PluginEstimate plugin_outcome(const Nuisance& nu, const FusedDataset& ds, Arm a, double t, int cause = 1);
PluginEstimate plugin_weighting(const Nuisance& nu, const FusedDataset& ds, Arm a, double t, int cause = 1);

/// Presents a multi-cause bundle as a single pooled endpoint (hazards summed).
class PooledNuisance final : public Nuisance {
 public:
  explicit PooledNuisance(const Nuisance& inner) : inner_(inner) {}
  int causes() const override { return 1; }
  double kappa() const override { return inner_.kappa(); }
  Truncation truncation() const override { return inner_.truncation(); }
  double prob_bridging(std::span<const double> x) const override { return inner_.prob_bridging(x); }
  double prob_historical_approved(std::span<const double> x) const override {
    return inner_.prob_historical_approved(x);
  }
  double prob_arm_bridging(Arm a, std::span<const double> x) const override { return inner_.prob_arm_bridging(a, x); }
  double marker_density(std::span<const double> s, std::span<const double> x, Trial trial, Arm a) const override {
    return inner_.marker_density(s, x, trial, a);
  }
  MarkerNodes marker_nodes(std::span<const double> x, Arm a) const override { return inner_.marker_nodes(x, a); }
  EventCurve event_curve(std::span<const double> x, std::span<const double> s) const override;
  double censoring_survival_before(double u, std::span<const double> x, std::span<const double> s) const override {
    return inner_.censoring_survival_before(u, x, s);
  }
  void censoring_survival_before_many(std::span<const double> u, std::span<const double> x, std::span<const double> s,
                                      std::span<double> out) const override {
    inner_.censoring_survival_before_many(u, x, s, out);
  }
  std::optional<int> held_out_fold() const override { return inner_.held_out_fold(); }

 private:
  const Nuisance& inner_;
};

struct SumCheckReport {
  std::vector<double> cause_plugins;
  double plugin_sum = 0.0;
  double allcause_plugin = 0.0;
  std::vector<double> cause_eif_means;
  double eif_sum = 0.0;
  double allcause_eif_mean = 0.0;
  double tolerance = 1e-8;
  bool pass = false;
};

/// Cause-specific plug-ins and EIF means must add up to the pooled all-cause
/// values computed from the same fits.
SumCheckReport check_sum_to_allcause(const Nuisance& nu, const FusedDataset& ds, Arm a, double t,
                                     double tolerance = 1e-8);

// ---------------------------------------------------------------------------
// EIF matrix

struct EifMatrix {
  std::vector<Arm> arms;
  std::vector<int> causes;
  std::vector<double> grid;
  std::size_t rows = 0;
  std::vector<double> values;  // [row][arm][cause][time]
  std::vector<double> estimates;  // [arm][cause][time]
  std::vector<unsigned char> bridging;  // Gamma per row
  double kappa = 0.5;

  EifMatrix() = default;
  EifMatrix(std::vector<Arm> arms, std::vector<int> causes, std::vector<double> grid, std::size_t rows);

  std::size_t columns() const { return arms.size() * causes.size() * grid.size(); }
  std::size_t column(std::size_t arm, std::size_t cause, std::size_t time) const {
    return (arm * causes.size() + cause) * grid.size() + time;
  }
  double& at(std::size_t row, std::size_t col) { return values[row * columns() + col]; }
  double at(std::size_t row, std::size_t col) const { return values[row * columns() + col]; }
  /// phi - Gamma * estimate / kappa
  double centered(std::size_t row, std::size_t col) const {
    return at(row, col) - (bridging[row] ? estimates[col] / kappa : 0.0);
  }
  /// Column means (compensated summation) stored into `estimates`.
  void compute_estimates();
};

void write_eif_csv(const EifMatrix& m, std::ostream& out);

}  // namespace fusioncurve
