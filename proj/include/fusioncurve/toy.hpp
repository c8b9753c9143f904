#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fusioncurve/dataset.hpp"
#include "fusioncurve/eif.hpp"
#include "fusioncurve/nuisance.hpp"

namespace fusioncurve {

/// One support point of the observed-data law with its probability.
struct ToyCell {
  SubjectRecord record;
  double prob = 0.0;
};

/// Finite-support observed-data law built from a factorized description:
/// P(Gamma), P(x | Gamma), P(A | x, Gamma), P(s | x, A, Gamma), and for the
/// historical trial the latent (T, cause) and censoring pmfs on a small time
/// grid. Events win ties with censoring. Mass beyond the grid becomes a cell
/// censored after the last grid time.
class DiscreteToyModel {
 public:
  static DiscreteToyModel from_json_text(const std::string& text);
  static DiscreteToyModel load(const std::filesystem::path& path);

  const std::string& name() const { return name_; }
  int causes() const { return causes_; }
  bool has_censoring() const { return has_censoring_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Arm>& bridging_arms() const { return bridging_arms_; }
  const std::vector<ToyCell>& cells() const { return cells_; }
  std::vector<double> base_probabilities() const;

  /// R^j(a, t; Gamma = 1) identified from an arbitrary table over cells()
  /// (probabilities need not sum to one; they are normalized).
  double functional(std::span<const double> probs, Arm a, double t, int cause) const;

  /// Exact nuisances of the table, without truncation.
  std::unique_ptr<Nuisance> nuisance(std::span<const double> probs) const;

  std::size_t x_index(std::span<const double> x) const;
  std::size_t s_index(std::span<const double> s) const;

 private:
  std::string name_;
  int causes_ = 1;
  bool has_censoring_ = false;
  std::vector<std::vector<double>> x_values_;
  std::vector<std::vector<double>> s_values_;
  std::vector<double> times_;
  std::vector<Arm> historical_arms_;
  std::vector<Arm> bridging_arms_;
  std::vector<ToyCell> cells_;
  // cell coordinates: trial, x, arm, s, time index (times_.size() = beyond grid), delta
  struct Coord {
    Trial trial;
    std::size_t x;
    Arm arm;
    std::size_t s;
    std::size_t time;
    int delta;
  };
  std::vector<Coord> coords_;

  friend class ToyNuisance;
};

struct GateauxPoint {
  std::size_t cell = 0;
  Arm arm = Arm::Investigational;
  double time = 0.0;
  int cause = 1;
  EifForm form = EifForm::Complete;
  double numeric = 0.0;
  double closed_form = 0.0;
};

struct GateauxReport {
  std::string toy;
  std::vector<EifForm> forms;
  std::size_t comparisons = 0;
  double max_error = 0.0;
  GateauxPoint worst;
};

/// Forms whose data assumptions hold for this toy.
std::vector<EifForm> applicable_forms(const DiscreteToyModel& toy);

/// Point-mass contamination check: for every support point o, the derivative
/// of the exact functional along (1 - eps) P + eps delta_o (central
/// differences at each eps, Richardson-combined across halvings) is compared
/// with phi(o) - Gamma(o) R / kappa from the production influence function.
/// Runs over every bridging arm, grid time, cause and applicable form.
GateauxReport gateaux_check(const DiscreteToyModel& toy, std::vector<double> eps = {1e-4, 5e-5});

std::string to_string(EifForm form);

}  // namespace fusioncurve
