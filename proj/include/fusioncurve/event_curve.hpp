#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fusioncurve {

/// Conditional law of (T, cause) given covariates and marker, as discrete
/// cause-specific hazard increments on sorted jump times:
///   G(u_i) = prod_{l<=i} (1 - sum_k dL^k(u_l)),
///   F^k(t) = sum_{u_i<=t} G(u_i-) dL^k(u_i).
/// With these definitions sum_k F^k(t) = 1 - G(t) holds exactly.
class EventCurve {
 public:
  EventCurve() = default;
  /// `hazards` is row-major [jump][cause] with discrete increments in [0,1].
  EventCurve(std::vector<double> times, std::size_t causes, std::vector<double> hazards);

  /// Converts continuous cumulative-hazard increments to discrete ones so that
  /// G(u_i) = exp(-sum of all increments up to u_i); ties across causes share
  /// the jump proportionally.
  static EventCurve from_cumulative_increments(std::vector<double> times, std::size_t causes,
                                               std::span<const double> increments);

  std::size_t size() const { return times_.size(); }
  std::size_t causes() const { return causes_; }
  std::span<const double> times() const { return times_; }
  double time(std::size_t i) const { return times_[i]; }
  /// Discrete hazard of cause k (1-based) at jump i.
  double hazard(std::size_t i, int cause) const { return hazards_[i * causes_ + (cause - 1)]; }
  double total_hazard(std::size_t i) const;
  /// G(u_i), after the jump.
  double survival_at(std::size_t i) const { return survival_[i]; }
  /// G(u_i-).
  double survival_before_jump(std::size_t i) const { return i == 0 ? 1.0 : survival_[i - 1]; }
  double cif_at(std::size_t i, int cause) const { return cif_[i * causes_ + (cause - 1)]; }

  /// Number of jumps at times <= t.
  std::size_t count_upto(double t) const;
  double survival(double t) const;
  double cif(int cause, double t) const;

 private:
  std::vector<double> times_;
  std::size_t causes_ = 1;
  std::vector<double> hazards_;
  std::vector<double> survival_;
  std::vector<double> cif_;
};

}  // namespace fusioncurve
