#include "fusioncurve/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fusioncurve/error.hpp"
#include "fusioncurve/kernels.hpp"
#include "fusioncurve/numeric.hpp"
#include "fusioncurve/quadrature.hpp"
#include "fusioncurve/rng.hpp"

namespace fusioncurve::sim {

namespace {

constexpr double kSdX = 0.7071067811865476;  // sqrt(0.5)

std::vector<double> draw_x(Engine& eng, double c) {
  std::normal_distribution<double> z;
  const auto mu = covariate_mean(c);
  std::vector<double> x(kDim);
  for (std::size_t j = 0; j < kDim; ++j) x[j] = mu[j] + kSdX * z(eng);
  return x;
}

double draw_exponential(Engine& eng, double rate) {
  return std::exponential_distribution<double>(rate)(eng);
}

/// Observed (time, delta) for latent cause-specific exponentials plus censoring.
/// Cause k's hazard depends on marker coordinate k; censoring on the first.
std::pair<double, int> draw_outcome(Engine& eng, std::span<const double> x, bool approved, std::span<const double> s,
                                    int causes, double hazard_mult) {
  double t = std::numeric_limits<double>::infinity();
  int cause = 0;
  for (int k = 1; k <= causes; ++k) {
    const double tk = draw_exponential(eng, hazard_mult * event_rate(x, approved, s[k - 1], k));
    if (tk < t) {
      t = tk;
      cause = k;
    }
  }
  const double cens = std::min(draw_exponential(eng, censoring_rate(x, s[0])), kAdminCensoring);
  if (t <= cens) return {t, cause};
  return {cens, 0};
}

double normal_pdf(double v, double mean) {
  const double d = v - mean;
  return std::exp(-0.5 * d * d) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

DgpConfig standard_config(std::size_t n_h, double c, std::uint64_t seed) {
  return DgpConfig{c, n_h, n_h / 4, seed, 1};
}

std::vector<double> covariate_mean(double c) { return {c, c, c, 0.8 * c, 0.8 * c, 0.8 * c}; }

double historical_marker_mean(std::span<const double> x, Arm a) {
  const double arm = a == Arm::Approved ? 1.0 : 0.0;
  return 2.0 + 0.5 * x[0] - x[1] + 1.5 * x[2] + arm * (x[1] - 0.5 * x[3] + 1.5 * x[4] - x[5]);
}

double bridging_marker_mean(std::span<const double> x, Arm a) {
  const double mult = a == Arm::Investigational ? 2.0 : 1.0;
  return 4.0 + 1.5 * x[0] - x[2] + 1.5 * x[5] + mult * (0.5 * x[1] + 0.5 * x[2] + 0.5 * x[3] - x[5]);
}

double event_exponent(std::span<const double> x, bool approved, double s) {
  const double arm = approved ? 1.0 : 0.0;
  return 0.5 * x[0] - 0.5 * x[4] + 0.3 * s * (1.3 * x[1] + 0.4 * x[3]) + arm * (0.2 * x[1] + 0.6 * x[2] - 1.2 * x[5]);
}

double event_rate(std::span<const double> x, bool approved, double s, int cause) {
  return 0.1 * std::exp(std::pow(0.5, cause - 1) * event_exponent(x, approved, s));
}

double censoring_rate(std::span<const double> x, double s) { return 0.03 * std::exp(-0.4 * x[1] + 0.1 * s); }

FusedDataset generate(const DgpConfig& cfg) {
  if (cfg.causes < 1) throw Error(ErrorCode::InvalidArgument, "causes must be at least 1");
  Engine eng(derive_seed(cfg.seed, {0x5111}));
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(0.5);
  std::vector<SubjectRecord> rows;
  rows.reserve(cfg.n_h + cfg.n_b);
  for (std::size_t i = 0; i < cfg.n_h; ++i) {
    SubjectRecord r;
    r.trial = Trial::Historical;
    r.x = draw_x(eng, cfg.c);
    r.arm = coin(eng) ? Arm::Approved : Arm::Placebo;
    const double mu = historical_marker_mean(r.x, r.arm);
    for (int k = 0; k < cfg.causes; ++k) r.s.push_back(mu + z(eng));
    const auto [t, d] = draw_outcome(eng, r.x, r.arm == Arm::Approved, r.s, cfg.causes, 1.0);
    r.time = t;
    r.delta = d;
    rows.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < cfg.n_b; ++i) {
    SubjectRecord r;
    r.trial = Trial::Bridging;
    r.x = draw_x(eng, cfg.c);
    r.arm = coin(eng) ? Arm::Approved : Arm::Investigational;
    const double mu = bridging_marker_mean(r.x, r.arm);
    for (int k = 0; k < cfg.causes; ++k) r.s.push_back(mu + z(eng));
    rows.push_back(std::move(r));
  }
  double max_time = 0.0;
  for (const auto& r : rows)
    if (r.time) max_time = std::max(max_time, *r.time);
  return FusedDataset(std::move(rows), cfg.causes, max_time);
}

NuisanceSpec correct_spec() {
  NuisanceSpec spec = NuisanceSpec::defaults(kDim);
  spec.event = {FeatureSpec::parse("x1,x2,x3,x4,x5,x6,s*x2,s*x4,a*x2,a*x3,a*x6")};
  spec.censoring = FeatureSpec::parse("x2,s");
  return spec;
}

std::vector<OracleValue> oracle_curve(double c, int causes, Arm a, std::span<const double> times, int cause,
                                      std::size_t draws, std::uint64_t seed) {
  if (cause < 0 || cause > causes) throw Error(ErrorCode::CauseOutOfRange, "oracle cause out of range");
  Engine eng(derive_seed(seed, {0x0AC1E}));
  std::normal_distribution<double> z;
  const std::size_t T = times.size();
  std::vector<CompensatedSum> sum(T), sq(T);
  std::vector<double> rates(static_cast<std::size_t>(causes));
  for (std::size_t d = 0; d < draws; ++d) {
    const auto x = draw_x(eng, c);
    const double mu = bridging_marker_mean(x, a);
    double total = 0.0;
    for (int k = 1; k <= causes; ++k) total += rates[static_cast<std::size_t>(k - 1)] = event_rate(x, true, mu + z(eng), k);
    const double share = cause == 0 ? 1.0 : rates[static_cast<std::size_t>(cause - 1)] / total;
    for (std::size_t i = 0; i < T; ++i) {
      const double v = share * -std::expm1(-total * times[i]);
      sum[i].add(v);
      sq[i].add(v * v);
    }
  }
  std::vector<OracleValue> out(T);
  const double n = static_cast<double>(draws);
  for (std::size_t i = 0; i < T; ++i) {
    const double m = sum[i].value() / n;
    out[i].value = m;
    out[i].mc_se = std::sqrt(std::max(0.0, sq[i].value() / n - m * m) / n);
  }
  return out;
}

OracleValue oracle_truth(double c, int causes, Arm a, double t, int cause, std::size_t draws, std::uint64_t seed) {
  const double grid[] = {t};
  return oracle_curve(c, causes, a, grid, cause, draws, seed).front();
}

// ---------------------------------------------------------------------------

OracleNuisance::OracleNuisance(const DgpConfig& cfg, Truncation truncation, double step, std::size_t nodes)
    : causes_(cfg.causes),
      kappa_(static_cast<double>(cfg.n_b) / static_cast<double>(cfg.n_h + cfg.n_b)),
      truncation_(truncation) {
  const auto steps = static_cast<std::size_t>(std::ceil(kAdminCensoring / step));
  for (std::size_t k = 1; k <= steps; ++k) jumps_.push_back(static_cast<double>(k) * step);
  // tensor Gauss-Hermite over the J marker coordinates
  const auto rule = gauss_hermite(causes_ == 1 ? nodes : 16);
  const std::size_t m = rule.nodes.size();
  std::size_t total = 1;
  for (int k = 0; k < causes_; ++k) total *= m;
  for (std::size_t i = 0; i < total; ++i) {
    double w = 1.0;
    for (std::size_t k = 0, rest = i; k < static_cast<std::size_t>(causes_); ++k, rest /= m) {
      gh_nodes_.push_back(rule.nodes[rest % m]);
      w *= rule.weights[rest % m];
    }
    gh_weights_.push_back(w);
  }
}

double OracleNuisance::marker_density(std::span<const double> s, std::span<const double> x, Trial trial,
                                      Arm a) const {
  const double mu = trial == Trial::Historical ? historical_marker_mean(x, a) : bridging_marker_mean(x, a);
  double d = 1.0;
  for (double v : s) d *= normal_pdf(v, mu);
  return d;
}

MarkerNodes OracleNuisance::marker_nodes(std::span<const double> x, Arm a) const {
  MarkerNodes m;
  m.dim = static_cast<std::size_t>(causes_);
  m.weights = gh_weights_;
  const double mu = bridging_marker_mean(x, a);
  for (double z : gh_nodes_) m.points.push_back(mu + z);
  return m;
}

EventCurve OracleNuisance::event_curve(std::span<const double> x, std::span<const double> s) const {
  const std::size_t J = static_cast<std::size_t>(causes_);
  std::vector<double> inc(jumps_.size() * J);
  double prev = 0.0;
  for (std::size_t i = 0; i < jumps_.size(); ++i) {
    const double width = jumps_[i] - prev;
    prev = jumps_[i];
    for (std::size_t k = 0; k < J; ++k) inc[i * J + k] = event_rate(x, true, s[k], static_cast<int>(k + 1)) * width;
  }
  return EventCurve::from_cumulative_increments(jumps_, J, inc);
}

void OracleNuisance::event_cif(std::span<const double> x, std::span<const double> s, int cause,
                               std::span<const double> times, std::span<double> out) const {
  double total = 0.0;
  for (int k = 1; k <= causes_; ++k) total += event_rate(x, true, s[static_cast<std::size_t>(k - 1)], k);
  const double share =
      cause == 0 ? 1.0 : event_rate(x, true, s[static_cast<std::size_t>(cause - 1)], cause) / total;
  for (std::size_t i = 0; i < times.size(); ++i) out[i] = share * -std::expm1(-total * times[i]);
}

double OracleNuisance::censoring_survival_before(double u, std::span<const double> x,
                                                 std::span<const double> s) const {
  if (u > kAdminCensoring) return 0.0;
  return std::exp(-censoring_rate(x, s[0]) * u);
}

BundleFactory oracle_factory(const DgpConfig& cfg, Truncation truncation) {
  auto nu = std::make_shared<const OracleNuisance>(cfg, truncation);
  return [nu](const FusedDataset&, std::span<const int>, int) -> std::shared_ptr<const Nuisance> { return nu; };
}

// ---------------------------------------------------------------------------

std::vector<Scenario> standard_scenarios() {
  std::vector<Scenario> out;
  for (std::size_t n : {1000, 2000, 3000, 4000})
    for (double c : {0.0, 0.05, 0.125, 0.25}) out.push_back({n, c});
  return out;
}

SummaryRow summarize(std::span<const double> estimates, std::span<const double> ses,
                     std::span<const unsigned char> covered, double truth) {
  SummaryRow row;
  row.truth = truth;
  row.replications = estimates.size();
  if (estimates.empty()) return row;
  const double n = static_cast<double>(estimates.size());
  row.mean = mean(estimates);
  std::vector<double> sorted(estimates.begin(), estimates.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t h = sorted.size() / 2;
  row.median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
  row.bias = row.mean - truth;
  row.pct_bias = 100.0 * row.bias / truth;
  CompensatedSum sq, cov;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    sq.add((estimates[i] - truth) * (estimates[i] - truth));
    cov.add(covered[i] ? 1.0 : 0.0);
  }
  row.rmse = std::sqrt(sq.value() / n);
  row.avg_se = mean(ses);
  row.coverage = cov.value() / n;
  return row;
}

namespace {

struct Replicate {
  bool ok = false;
  double estimate = 0.0, se = 0.0;
  bool covered = false;
};

EstimatorConfig single_point(const StudyConfig& cfg, std::uint64_t seed) {
  EstimatorConfig e = cfg.estimator;
  e.grid = {cfg.t};
  e.arms = {cfg.arm};
  e.causes = {1};
  e.band_draws = 0;
  e.threads = 1;
  e.seed = seed;
  return e;
}

}  // namespace

std::vector<SummaryRow> run_study(std::span<const Scenario> scenarios, const StudyConfig& cfg) {
  std::vector<SummaryRow> rows;
  for (std::size_t sc = 0; sc < scenarios.size(); ++sc) {
    const Scenario where = scenarios[sc];
    const double truth =
        1.0 - oracle_truth(where.c, 1, cfg.arm, cfg.t, 1, cfg.truth_draws, derive_seed(cfg.seed, {0x7247})).value;
    std::function<Replicate(std::size_t)> task = [&](std::size_t r) {
      Replicate rep;
      const std::uint64_t seed = derive_seed(cfg.seed, {sc, r});
      try {
        const FusedDataset ds = generate(standard_config(where.n_h, where.c, seed));
        const auto res = estimate_curve(ds, single_point(cfg, derive_seed(seed, {1})));
        const CurvePoint& p = res.curve.points.front();
        rep.estimate = 1.0 - p.estimate;
        rep.se = p.se;
        rep.covered = 1.0 - p.ci_hi <= truth && truth <= 1.0 - p.ci_lo;
        rep.ok = true;
      } catch (const Error&) {
      }
      return rep;
    };
    const auto reps = parallel_map(cfg.replications, task, cfg.threads);
    std::vector<double> est, se;
    std::vector<unsigned char> cov;
    std::size_t failures = 0;
    for (const auto& r : reps) {
      if (!r.ok) {
        ++failures;
        continue;
      }
      est.push_back(r.estimate);
      se.push_back(r.se);
      cov.push_back(r.covered ? 1 : 0);
    }
    SummaryRow row = summarize(est, se, cov, truth);
    row.n_h = where.n_h;
    row.c = where.c;
    row.failures = failures;
    rows.push_back(row);
  }
  return rows;
}

std::vector<MisspecRow> misspecification_suite(const Scenario& where, std::span<const fusioncurve::Scenario> scenarios,
                                               const StudyConfig& cfg) {
  const double truth =
      1.0 - oracle_truth(where.c, 1, cfg.arm, cfg.t, 1, cfg.truth_draws, derive_seed(cfg.seed, {0x7247})).value;
  const std::size_t S = scenarios.size();
  std::function<std::vector<double>(std::size_t)> task = [&](std::size_t r) {
    std::vector<double> out(S, std::nan(""));
    const std::uint64_t seed = derive_seed(cfg.seed, {0x3155, r});
    const FusedDataset ds = generate(standard_config(where.n_h, where.c, seed));
    for (std::size_t k = 0; k < S; ++k) {
      EstimatorConfig e = single_point(cfg, derive_seed(seed, {1}));
      e.spec = scenario_spec(scenarios[k], cfg.estimator.spec);
      try {
        out[k] = 1.0 - estimate_curve(ds, e).curve.points.front().estimate;
      } catch (const Error&) {
      }
    }
    return out;
  };
  const auto reps = parallel_map(cfg.replications, task, cfg.threads);
  std::vector<MisspecRow> rows;
  for (std::size_t k = 0; k < S; ++k) {
    std::vector<double> est;
    MisspecRow row;
    row.scenario = scenarios[k];
    row.truth = truth;
    for (const auto& r : reps) {
      if (std::isnan(r[k]))
        ++row.failures;
      else
        est.push_back(r[k]);
    }
    row.replications = est.size();
    row.mean = mean(est);
    row.bias = row.mean - truth;
    row.mc_se = est.empty() ? 0.0 : sample_sd(est) / std::sqrt(static_cast<double>(est.size()));
    rows.push_back(row);
  }
  return rows;
}

BandStudy band_study(const Scenario& where, std::span<const double> grid, const StudyConfig& cfg) {
  const auto truth = oracle_curve(where.c, 1, cfg.arm, grid, 1, cfg.truth_draws, derive_seed(cfg.seed, {0x7247}));
  struct Rep {
    bool ok = false;
    bool covered = false;
    std::size_t pointwise = 0;
    std::size_t violations = 0;
  };
  std::function<Rep(std::size_t)> task = [&](std::size_t r) {
    Rep rep;
    const std::uint64_t seed = derive_seed(cfg.seed, {0xBA9D, r});
    try {
      const FusedDataset ds = generate(standard_config(where.n_h, where.c, seed));
      EstimatorConfig e = cfg.estimator;
      e.grid.assign(grid.begin(), grid.end());
      e.arms = {cfg.arm};
      e.causes = {1};
      e.threads = 1;
      e.seed = derive_seed(seed, {1});
      const auto res = estimate_curve(ds, e);
      rep.covered = true;
      for (std::size_t t = 0; t < grid.size(); ++t) {
        const CurvePoint& p = res.curve.points[t];
        const double v = truth[t].value;
        rep.covered = rep.covered && p.band_lo <= v && v <= p.band_hi;
        if (p.ci_lo <= v && v <= p.ci_hi) ++rep.pointwise;
        if (p.band_lo > p.ci_lo || p.band_hi < p.ci_hi) ++rep.violations;
      }
      rep.ok = true;
    } catch (const Error&) {
    }
    return rep;
  };
  const auto reps = parallel_map(cfg.replications, task, cfg.threads);
  BandStudy out;
  std::size_t covered = 0, pointwise = 0;
  for (const auto& r : reps) {
    if (!r.ok) {
      ++out.failures;
      continue;
    }
    ++out.replications;
    covered += r.covered ? 1 : 0;
    pointwise += r.pointwise;
    out.band_inside_ci_violations += r.violations;
  }
  if (out.replications > 0) {
    out.coverage = static_cast<double>(covered) / static_cast<double>(out.replications);
    out.pointwise_coverage =
        static_cast<double>(pointwise) / static_cast<double>(out.replications * grid.size());
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<SubjectRecord> generate_ncde(const NcdeDgp& dgp) {
  Engine eng(derive_seed(dgp.seed, {0x9CDE}));
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(0.5);
  std::vector<SubjectRecord> rows;
  rows.reserve(dgp.n);
  const double mult = std::exp(dgp.direct_effect);
  for (std::size_t i = 0; i < dgp.n; ++i) {
    SubjectRecord r;
    r.trial = Trial::Historical;
    r.x = draw_x(eng, dgp.c);
    r.arm = coin(eng) ? Arm::Approved : Arm::Investigational;
    r.s = {bridging_marker_mean(r.x, r.arm) + z(eng)};
    const auto [t, d] = draw_outcome(eng, r.x, true, r.s, 1, r.arm == Arm::Investigational ? mult : 1.0);
    r.time = t;
    r.delta = d;
    rows.push_back(std::move(r));
  }
  return rows;
}

NcdeStudy ncde_study(const NcdeDgp& dgp, std::size_t replications, const NcdeConfig& cfg, std::uint64_t seed,
                     int threads) {
  std::function<int(std::size_t)> task = [&](std::size_t r) {
    NcdeDgp d = dgp;
    d.seed = derive_seed(seed, {0x9CDE, r});
    const auto rows = generate_ncde(d);
    double max_time = 0.0;
    for (const auto& row : rows) max_time = std::max(max_time, *row.time);
    NcdeConfig c = cfg;
    c.estimator.threads = 1;
    c.estimator.seed = derive_seed(d.seed, {1});
    try {
      return ncde_test(rows, 1, max_time, c).reject ? 1 : 0;
    } catch (const Error&) {
      return -1;
    }
  };
  const auto out = parallel_map(replications, task, threads);
  NcdeStudy st;
  std::size_t rejects = 0;
  for (int v : out) {
    if (v < 0) {
      ++st.failures;
      continue;
    }
    ++st.replications;
    rejects += static_cast<std::size_t>(v);
  }
  if (st.replications > 0) {
    const double n = static_cast<double>(st.replications);
    st.rejection_rate = static_cast<double>(rejects) / n;
    st.mc_se = std::sqrt(st.rejection_rate * (1.0 - st.rejection_rate) / n);
  }
  return st;
}

}  // namespace fusioncurve::sim
