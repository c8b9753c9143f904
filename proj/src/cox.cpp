#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "fusioncurve/error.hpp"
#include "fusioncurve/models.hpp"

namespace fusioncurve {

namespace {

constexpr int kMaxIterations = 60;
constexpr double kStepTolerance = 1e-9;
constexpr double kDivergence = 50.0;

struct CoxData {
  std::vector<double> time;    // effective time used for risk-set ordering
  std::vector<int> status;     // 1 = modeled event
  Eigen::MatrixXd z;           // centered features
  std::vector<std::size_t> order;  // descending effective time
};

struct PartialLikelihood {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;  // of the log-likelihood (negative semidefinite)
};

PartialLikelihood evaluate(const CoxData& d, const Eigen::VectorXd& beta) {
  const auto p = d.z.cols();
  PartialLikelihood pl;
  pl.gradient = Eigen::VectorXd::Zero(p);
  pl.hessian = Eigen::MatrixXd::Zero(p, p);
  const Eigen::VectorXd eta = d.z * beta;
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
  const std::size_t n = d.order.size();
  std::size_t i = 0;
  while (i < n) {
    const double t = d.time[d.order[i]];
    std::size_t j = i;
    int events = 0;
    Eigen::VectorXd zsum = Eigen::VectorXd::Zero(p);
    double eta_sum = 0.0;
    for (; j < n && d.time[d.order[j]] == t; ++j) {
      const std::size_t r = d.order[j];
      const double w = std::exp(eta(static_cast<Eigen::Index>(r)));
      const auto zr = d.z.row(static_cast<Eigen::Index>(r)).transpose();
      s0 += w;
      s1 += w * zr;
      s2.noalias() += w * zr * zr.transpose();
      if (d.status[r]) {
        ++events;
        zsum += zr;
        eta_sum += eta(static_cast<Eigen::Index>(r));
      }
    }
    if (events > 0) {
      const Eigen::VectorXd zbar = s1 / s0;
      pl.loglik += eta_sum - events * std::log(s0);
      pl.gradient += zsum - events * zbar;
      pl.hessian -= events * (s2 / s0 - zbar * zbar.transpose());
    }
    i = j;
  }
  return pl;
}

}  // namespace

double SurvivalFit::linear_predictor(std::span<const double> x, std::span<const double> s, bool approved) const {
  const int own = kind == SurvivalKind::Event ? cause - 1 : 0;
  double eta = 0.0;
  for (std::size_t j = 0; j < coefficients.size(); ++j)
    eta += coefficients[j] * (spec.terms()[j].eval(x, s, approved, own) - centers[j]);
  return eta;
}

double SurvivalFit::baseline(double t) const {
  const auto n = std::upper_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin();
  return n == 0 ? 0.0 : baseline_cumulative[static_cast<std::size_t>(n - 1)];
}

double SurvivalFit::baseline_before(double t) const {
  const auto n = std::lower_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin();
  return n == 0 ? 0.0 : baseline_cumulative[static_cast<std::size_t>(n - 1)];
}

double SurvivalFit::survival(double t, std::span<const double> x, std::span<const double> s, bool approved) const {
  return std::exp(-baseline(t) * std::exp(linear_predictor(x, s, approved)));
}

double SurvivalFit::survival_before(double t, std::span<const double> x, std::span<const double> s,
                                    bool approved) const {
  return std::exp(-baseline_before(t) * std::exp(linear_predictor(x, s, approved)));
}

SurvivalFit fit_survival(SurvivalKind kind, int cause, std::span<const SubjectRecord> records,
                         std::span<const std::size_t> rows, const FeatureSpec& spec) {
  SurvivalFit fit;
  fit.kind = kind;
  fit.cause = kind == SurvivalKind::Event ? cause : 0;
  fit.spec = spec;
  const auto p = static_cast<Eigen::Index>(spec.size());
  const int own = kind == SurvivalKind::Event ? cause - 1 : 0;

  CoxData d;
  std::vector<std::vector<double>> raw;
  std::vector<double> f(spec.size());
  for (std::size_t i : rows) {
    const auto& r = records[i];
    if (!r.historical()) continue;
    const int delta = *r.delta;
    int status = 0;
    double t = *r.time;
    if (kind == SurvivalKind::Event) {
      status = delta == cause ? 1 : 0;
    } else {
      status = delta == 0 ? 1 : 0;
      // Events tied with a censoring time are not at risk of censoring there.
      if (delta != 0) t = std::nextafter(t, 0.0);
    }
    spec.eval(r.x, r.s, r.arm == Arm::Approved, own, f);
    raw.push_back(f);
    d.time.push_back(t);
    d.status.push_back(status);
  }
  const std::size_t n = d.time.size();
  const std::size_t events = static_cast<std::size_t>(std::accumulate(d.status.begin(), d.status.end(), 0));
  if (events == 0)
    throw Error(ErrorCode::NoEvents, kind == SurvivalKind::Event
                                         ? "no events of cause " + std::to_string(cause) + " in training rows"
                                         : "no censored rows to fit the censoring model");

  fit.centers.assign(spec.size(), 0.0);
  for (const auto& row : raw)
    for (std::size_t j = 0; j < row.size(); ++j) fit.centers[j] += row[j] / static_cast<double>(n);
  d.z.resize(static_cast<Eigen::Index>(n), p);
  for (std::size_t i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      d.z(static_cast<Eigen::Index>(i), j) = raw[i][static_cast<std::size_t>(j)] - fit.centers[static_cast<std::size_t>(j)];
  d.order.resize(n);
  std::iota(d.order.begin(), d.order.end(), std::size_t{0});
  std::stable_sort(d.order.begin(), d.order.end(), [&](std::size_t a, std::size_t b) { return d.time[a] > d.time[b]; });

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (p > 0) {
    PartialLikelihood pl = evaluate(d, beta);
    bool converged = false;
    for (int it = 1; it <= kMaxIterations; ++it) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(-pl.hessian);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
          ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff()))
        throw Error(ErrorCode::RankDeficient, "partial-likelihood information matrix is singular");
      Eigen::VectorXd step = ldlt.solve(pl.gradient);
      double scale = 1.0;
      PartialLikelihood next;
      for (int halving = 0; halving < 40; ++halving) {
        next = evaluate(d, beta + scale * step);
        if (std::isfinite(next.loglik) && next.loglik >= pl.loglik - 1e-10 * (1.0 + std::abs(pl.loglik))) break;
        scale *= 0.5;
      }
      beta += scale * step;
      pl = std::move(next);
      fit.iterations = it;
      if (!beta.allFinite() || beta.cwiseAbs().maxCoeff() > kDivergence)
        throw Error(ErrorCode::Nonconvergence, "proportional-hazards coefficients diverge");
      if ((scale * step).cwiseAbs().maxCoeff() < kStepTolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) throw Error(ErrorCode::Nonconvergence, "proportional-hazards fit did not converge");
  }
  fit.coefficients.assign(beta.data(), beta.data() + p);

  // Breslow baseline at the centered linear predictor, ascending event times.
  const Eigen::VectorXd eta = d.z * beta;
  double s0 = 0.0;
  std::vector<std::pair<double, double>> jumps;
  std::size_t i = 0;
  while (i < n) {
    const double t = d.time[d.order[i]];
    std::size_t j = i;
    int ev = 0;
    for (; j < n && d.time[d.order[j]] == t; ++j) {
      s0 += std::exp(eta(static_cast<Eigen::Index>(d.order[j])));
      ev += d.status[d.order[j]];
    }
    if (ev > 0) jumps.emplace_back(t, ev / s0);
    i = j;
  }
  std::reverse(jumps.begin(), jumps.end());
  double cum = 0.0;
  for (const auto& [t, dl] : jumps) {
    fit.jump_times.push_back(t);
    fit.baseline_increments.push_back(dl);
    cum += dl;
    fit.baseline_cumulative.push_back(cum);
  }
  return fit;
}

}  // namespace fusioncurve
