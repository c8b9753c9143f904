#include "fusioncurve/event_curve.hpp"

#include <algorithm>
#include <cmath>

#include "fusioncurve/error.hpp"

namespace fusioncurve {

EventCurve::EventCurve(std::vector<double> times, std::size_t causes, std::vector<double> hazards)
    : times_(std::move(times)), causes_(causes), hazards_(std::move(hazards)) {
  if (causes_ == 0 || hazards_.size() != times_.size() * causes_)
    throw Error(ErrorCode::InvalidArgument, "event curve: hazard table does not match jump times");
  survival_.resize(times_.size());
  cif_.resize(times_.size() * causes_);
  double g = 1.0;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "event curve: jump times must be strictly increasing");
    double total = 0.0;
    for (std::size_t k = 0; k < causes_; ++k) {
      const double h = hazards_[i * causes_ + k];
      const double prev = i == 0 ? 0.0 : cif_[(i - 1) * causes_ + k];
      cif_[i * causes_ + k] = prev + g * h;
      total += h;
    }
    g *= std::max(0.0, 1.0 - total);
    survival_[i] = g;
  }
}

EventCurve EventCurve::from_cumulative_increments(std::vector<double> times, std::size_t causes,
                                                  std::span<const double> increments) {
  std::vector<double> hazards(increments.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < causes; ++k) total += increments[i * causes + k];
    if (total <= 0.0) continue;
    const double jump = -std::expm1(-total);
    for (std::size_t k = 0; k < causes; ++k) hazards[i * causes + k] = jump * increments[i * causes + k] / total;
  }
  return EventCurve(std::move(times), causes, std::move(hazards));
}

double EventCurve::total_hazard(std::size_t i) const {
  double t = 0.0;
  for (std::size_t k = 0; k < causes_; ++k) t += hazards_[i * causes_ + k];
  return t;
}

std::size_t EventCurve::count_upto(double t) const {
  return static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
}

double EventCurve::survival(double t) const {
  const std::size_t n = count_upto(t);
  return n == 0 ? 1.0 : survival_[n - 1];
}

double EventCurve::cif(int cause, double t) const {
  if (cause < 1 || static_cast<std::size_t>(cause) > causes_)
    throw Error(ErrorCode::CauseOutOfRange, "cause " + std::to_string(cause) + " out of range");
  const std::size_t n = count_upto(t);
  return n == 0 ? 0.0 : cif_[(n - 1) * causes_ + (cause - 1)];
}

}  // namespace fusioncurve
