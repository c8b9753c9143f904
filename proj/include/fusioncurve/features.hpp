#pragma once

#include <span>
#include <string>
#include <vector>

namespace fusioncurve {

/// A linear-predictor term: a product of covariates x<j>, markers s / s<k>,
/// and the approved-arm indicator a. The empty product is not allowed; the
/// intercept is implicit where a model has one.
struct FeatureTerm {
  enum class Kind { Covariate, OwnMarker, Marker, Approved };
  struct Factor {
    Kind kind;
    int index = 0;  // 0-based covariate or marker index
  };
  std::vector<Factor> factors;

  double eval(std::span<const double> x, std::span<const double> s, bool approved, int own_marker) const;
  bool uses_marker() const;
  bool uses_arm() const;
  std::string to_string() const;
};

class FeatureSpec {
 public:
  FeatureSpec() = default;
  explicit FeatureSpec(std::vector<FeatureTerm> terms) : terms_(std::move(terms)) {}

  /// Comma-separated terms, e.g. "x1,x5,s*x2,a*x3". "" or "1" is intercept-only.
  static FeatureSpec parse(const std::string& text);
  /// x1..xd
  static FeatureSpec linear(std::size_t dim);

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::vector<FeatureTerm>& terms() const { return terms_; }
  bool uses_marker() const;
  bool uses_arm() const;
  std::size_t max_covariate() const;  // 1 + highest covariate index used (0 if none)
  std::size_t max_marker() const;

  void eval(std::span<const double> x, std::span<const double> s, bool approved, int own_marker,
            std::span<double> out) const;
  std::string to_string() const;

 private:
  std::vector<FeatureTerm> terms_;
};

}  // namespace fusioncurve
