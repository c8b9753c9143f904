#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "fusioncurve/error.hpp"
#include "fusioncurve/models.hpp"

namespace fusioncurve {

namespace {

constexpr double kScoreTolerance = 1e-8;
constexpr int kMaxIterations = 100;
constexpr double kDivergence = 30.0;

double logistic(double eta) {
  return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

}  // namespace

double LogisticModel::linear_predictor(std::span<const double> features) const {
  double eta = coefficients[0];
  for (std::size_t j = 0; j < features.size(); ++j) eta += coefficients[j + 1] * features[j];
  return eta;
}

LogisticModel fit_logistic(std::span<const double> design, std::size_t p, std::span<const int> labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto cols = static_cast<Eigen::Index>(p + 1);
  if (design.size() != labels.size() * p) throw Error(ErrorCode::InvalidArgument, "design size mismatch");
  std::size_t ones = 0;
  for (int y : labels) ones += y == 1 ? 1 : 0;
  if (ones < 2 || labels.size() - ones < 2)
    throw Error(ErrorCode::Separation, "logistic fit needs at least two rows in each class");

  Eigen::MatrixXd X(n, cols);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < cols; ++j) X(i, j) = design[static_cast<std::size_t>(i) * p + (j - 1)];
    y(i) = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < cols) throw Error(ErrorCode::RankDeficient, "logistic design matrix is rank deficient");

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(cols);
  const double ybar = y.mean();
  beta(0) = std::log(ybar / (1.0 - ybar));
  LogisticModel out;
  for (int it = 0; it <= kMaxIterations; ++it) {
    Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = logistic(eta(i));
      w(i) = mu(i) * (1.0 - mu(i));
    }
    Eigen::VectorXd score = X.transpose() * (y - mu) / static_cast<double>(n);
    const double max_score = score.cwiseAbs().maxCoeff();
    if (max_score < kScoreTolerance) {
      out.coefficients.assign(beta.data(), beta.data() + cols);
      out.iterations = it;
      out.max_score = max_score;
      return out;
    }
    if (it == kMaxIterations) break;
    Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X / static_cast<double>(n);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::Separation, "logistic information matrix singular");
    beta += ldlt.solve(score);
    if (!beta.allFinite() || beta.cwiseAbs().maxCoeff() > kDivergence)
      throw Error(ErrorCode::Separation, "logistic coefficients diverge (separated classes)");
  }
  throw Error(ErrorCode::Separation, "logistic fit did not converge in 100 iterations");
}

double BinaryModelFit::predict(std::span<const double> x, double p_min) const {
  std::vector<double> f(spec.size());
  spec.eval(x, {}, false, 0, f);
  const double p = logistic(model.linear_predictor(f));
  return std::clamp(p, p_min, 1.0 - p_min);
}

BinaryModelFit fit_binary(BinaryTarget target, std::span<const SubjectRecord> records,
                          std::span<const std::size_t> rows, const FeatureSpec& spec) {
  if (spec.uses_marker() || spec.uses_arm())
    throw Error(ErrorCode::InvalidArgument, "propensity features may only use covariates");
  std::vector<double> design;
  std::vector<int> labels;
  design.reserve(rows.size() * spec.size());
  std::vector<double> f(spec.size());
  for (std::size_t i : rows) {
    const auto& r = records[i];
    int label = 0;
    switch (target) {
      case BinaryTarget::GammaGivenX: label = r.bridging() ? 1 : 0; break;
      case BinaryTarget::ArmGivenXBridging:
        if (!r.bridging()) continue;
        label = r.arm == Arm::Investigational ? 1 : 0;
        break;
      case BinaryTarget::ArmAndGamma0GivenX:
        label = (r.historical() && r.arm == Arm::Approved) ? 1 : 0;
        break;
    }
    if (spec.max_covariate() > r.x.size())
      throw Error(ErrorCode::InvalidArgument, "feature spec references a missing covariate");
    spec.eval(r.x, {}, false, 0, f);
    design.insert(design.end(), f.begin(), f.end());
    labels.push_back(label);
  }
  BinaryModelFit fit;
  fit.target = target;
  fit.spec = spec;
  fit.model = fit_logistic(design, spec.size(), labels);
  return fit;
}

}  // namespace fusioncurve
