#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "fusioncurve/error.hpp"
#include "fusioncurve/models.hpp"

namespace fusioncurve {

double ConditionalDensityFit::mean(std::span<const double> x, std::size_t coordinate) const {
  const auto& b = coefficients[coordinate];
  double m = b[0];
  for (std::size_t j = 0; j < spec.size(); ++j) m += b[j + 1] * spec.terms()[j].eval(x, {}, false, 0);
  return m;
}

double ConditionalDensityFit::density(std::span<const double> s, std::span<const double> x) const {
  static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  double f = 1.0;
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    const double z = (s[k] - mean(x, k)) / sigma[k];
    f *= inv_sqrt_2pi * std::exp(-0.5 * z * z) / sigma[k];
  }
  return f;
}

ConditionalDensityFit fit_conditional_density(Trial trial, Arm arm, std::span<const SubjectRecord> records,
                                              std::span<const std::size_t> rows, const FeatureSpec& spec) {
  if (spec.uses_marker() || spec.uses_arm())
    throw Error(ErrorCode::InvalidArgument, "marker-density features may only use covariates");
  std::vector<std::size_t> stratum;
  for (std::size_t i : rows)
    if (records[i].trial == trial && records[i].arm == arm) stratum.push_back(i);
  const std::size_t p = spec.size() + 1;
  if (stratum.size() < p + 1)
    throw Error(ErrorCode::TooFewRows, "marker stratum (" + std::string(trial == Trial::Historical ? "historical" : "bridging") +
                                           ", arm " + std::string(arm_code(arm)) + ") has " +
                                           std::to_string(stratum.size()) + " rows, needs " + std::to_string(p + 1));
  const auto n = static_cast<Eigen::Index>(stratum.size());
  const std::size_t markers = records[stratum.front()].s.size();
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(p));
  std::vector<double> f(spec.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[stratum[static_cast<std::size_t>(i)]];
    spec.eval(r.x, {}, false, 0, f);
    X(i, 0) = 1.0;
    for (std::size_t j = 0; j < f.size(); ++j) X(i, static_cast<Eigen::Index>(j + 1)) = f[j];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < static_cast<Eigen::Index>(p))
    throw Error(ErrorCode::RankDeficient, "marker-density design matrix is rank deficient");

  ConditionalDensityFit fit;
  fit.trial = trial;
  fit.arm = arm;
  fit.spec = spec;
  for (std::size_t k = 0; k < markers; ++k) {
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = records[stratum[static_cast<std::size_t>(i)]].s[k];
    Eigen::VectorXd beta = qr.solve(y);
    const double rss = (y - X * beta).squaredNorm();
    const double sigma = std::sqrt(rss / static_cast<double>(n - static_cast<Eigen::Index>(p)));
    fit.coefficients.emplace_back(beta.data(), beta.data() + beta.size());
    fit.sigma.push_back(std::max(sigma, kSigmaMin));
  }
  return fit;
}

}  // namespace fusioncurve
