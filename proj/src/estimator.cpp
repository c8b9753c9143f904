#include "fusioncurve/estimator.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>

#include "fusioncurve/error.hpp"
#include "fusioncurve/kernels.hpp"
#include "fusioncurve/numeric.hpp"
#include "fusioncurve/rng.hpp"

namespace fusioncurve {

namespace {

double logistic(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

constexpr double kLogitClip = 1e-12;

double clip_risk(double r) { return std::clamp(r, kLogitClip, 1.0 - kLogitClip); }

}  // namespace

double SensitivitySpec::apply(double risk) const {
  if (identity()) return risk;
  const double r = clip_risk(risk);
  return std::clamp(rho * logistic(std::log(r / (1.0 - r)) + h_offset), 0.0, 1.0);
}

double SensitivitySpec::derivative(double risk) const {
  if (identity()) return 1.0;
  const double r = clip_risk(risk);
  const double p = logistic(std::log(r / (1.0 - r)) + h_offset);
  if (rho * p >= 1.0) return 0.0;
  return rho * p * (1.0 - p) / (r * (1.0 - r));
}

std::size_t CurveEstimate::arm_index(Arm a) const {
  for (std::size_t i = 0; i < arms.size(); ++i)
    if (arms[i] == a) return i;
  throw Error(ErrorCode::InvalidArgument, "arm " + std::string(arm_code(a)) + " was not estimated");
}

double normal_critical(double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + level / 2.0);
}

std::vector<double> default_grid(const FusedDataset& ds) {
  std::vector<double> times;
  for (const auto& r : ds.records())
    if (r.historical() && *r.delta >= 1 && *r.time <= ds.horizon()) times.push_back(*r.time);
  if (times.empty()) throw Error(ErrorCode::NoEvents, "no historical events before the horizon to build a grid");
  std::sort(times.begin(), times.end());
  std::vector<double> grid;
  for (int d = 1; d <= 10; ++d) {
    const double pos = d / 10.0 * static_cast<double>(times.size()) - 1.0;
    const auto idx = static_cast<std::size_t>(std::clamp(std::ceil(pos), 0.0, static_cast<double>(times.size() - 1)));
    grid.push_back(times[idx]);
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

double eif_standard_error(const EifMatrix& m, std::size_t column) {
  CompensatedSum s;
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double c = m.centered(r, column);
    s.add(c * c);
  }
  const double n = static_cast<double>(m.rows);
  return std::sqrt(s.value() / n / n);
}

BandResult uniform_band(const EifMatrix& m, std::size_t arm, std::size_t cause, double level, std::size_t draws,
                        std::uint64_t seed, int threads, bool serial) {
  const std::size_t T = m.grid.size();
  const std::size_t n = m.rows;
  const double z_level = normal_critical(level);
  std::vector<double> sd(T);
  for (std::size_t t = 0; t < T; ++t) {
    sd[t] = eif_standard_error(m, m.column(arm, cause, t)) * std::sqrt(static_cast<double>(n));
    if (!(sd[t] > 0.0))
      throw Error(ErrorCode::DegenerateVariance, "influence values have zero variance at t = " + format_double(m.grid[t]));
  }
  BandResult band;
  band.quantile = z_level;
  if (draws > 0) {
    std::vector<double> z(n * T);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t t = 0; t < T; ++t) z[r * T + t] = m.centered(r, m.column(arm, cause, t)) / sd[t];
    std::vector<double> stats =
        serial ? sup_stats_serial(z, n, T, draws, seed) : sup_stats_parallel(z, n, T, draws, seed, threads);
    std::sort(stats.begin(), stats.end());
    const auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(draws)));
    band.sup_quantile = stats[std::min(draws, std::max<std::size_t>(k, 1)) - 1];
    band.quantile = std::max(band.sup_quantile, z_level);
  }
  band.half_width.resize(T);
  for (std::size_t t = 0; t < T; ++t) band.half_width[t] = band.quantile * sd[t] / std::sqrt(static_cast<double>(n));
  return band;
}

std::vector<double> isotonic(std::span<const double> y) {
  std::vector<double> sum, out;
  std::vector<std::size_t> count;
  for (double v : y) {
    sum.push_back(v);
    count.push_back(1);
    while (sum.size() > 1) {
      const std::size_t k = sum.size() - 1;
      if (sum[k - 1] / static_cast<double>(count[k - 1]) <= sum[k] / static_cast<double>(count[k])) break;
      sum[k - 1] += sum[k];
      count[k - 1] += count[k];
      sum.pop_back();
      count.pop_back();
    }
  }
  out.reserve(y.size());
  for (std::size_t b = 0; b < sum.size(); ++b) out.insert(out.end(), count[b], sum[b] / static_cast<double>(count[b]));
  return out;
}

void monotone_correct(CurveEstimate& curve) {
  const std::size_t T = curve.grid.size();
  auto project = [&](std::size_t a, std::size_t c, auto get, auto set) {
    std::vector<double> y(T);
    for (std::size_t t = 0; t < T; ++t) y[t] = get(curve.at(a, c, t));
    const auto p = isotonic(y);
    for (std::size_t t = 0; t < T; ++t) set(curve.at(a, c, t), std::clamp(p[t], 0.0, 1.0));
  };
  for (std::size_t a = 0; a < curve.arms.size(); ++a)
    for (std::size_t c = 0; c < curve.causes.size(); ++c) {
      project(a, c, [](const CurvePoint& p) { return p.estimate; }, [](CurvePoint& p, double v) { p.mono_estimate = v; });
      project(a, c, [](const CurvePoint& p) { return p.ci_lo; }, [](CurvePoint& p, double v) { p.mono_ci_lo = v; });
      project(a, c, [](const CurvePoint& p) { return p.ci_hi; }, [](CurvePoint& p, double v) { p.mono_ci_hi = v; });
      project(a, c, [](const CurvePoint& p) { return p.band_lo; }, [](CurvePoint& p, double v) { p.mono_band_lo = v; });
      project(a, c, [](const CurvePoint& p) { return p.band_hi; }, [](CurvePoint& p, double v) { p.mono_band_hi = v; });
    }
}

CurveResult estimate_curve(const FusedDataset& ds, const EstimatorConfig& cfg) {
  if (cfg.folds < 2) throw Error(ErrorCode::InvalidArgument, "K must be at least 2");
  std::vector<double> grid = cfg.grid.empty() ? default_grid(ds) : cfg.grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (double t : grid)
    if (!(t > 0.0) || t > ds.horizon())
      throw Error(ErrorCode::GridBeyondHorizon, "grid time " + format_double(t) + " outside (0, " +
                                                    format_double(ds.horizon()) + "]");
  for (int j : cfg.causes)
    if (j < 1 || j > ds.causes()) throw Error(ErrorCode::CauseOutOfRange, "cause " + std::to_string(j) + " not in data");
  for (Arm a : cfg.arms) {
    if (a == Arm::Placebo) throw Error(ErrorCode::InvalidArgument, "the placebo arm is not a bridging target");
    if (ds.count(Trial::Bridging, a) == 0)
      throw Error(ErrorCode::NoArmRows, "arm " + std::string(arm_code(a)) + " has no bridging rows");
  }

  const std::vector<int> folds = make_folds(ds, cfg.folds, cfg.seed);
  BundleFactory factory = cfg.factory;
  if (!factory) {
    const NuisanceSpec spec = cfg.spec;
    factory = [spec](const FusedDataset& d, std::span<const int> f, int k) { return fit_bundle(d, f, k, spec); };
  }
  std::function<std::shared_ptr<const Nuisance>(std::size_t)> fit_fold = [&](std::size_t k) {
    return factory(ds, folds, static_cast<int>(k + 1));
  };
  const auto bundles = cfg.serial ? serial_map(static_cast<std::size_t>(cfg.folds), fit_fold)
                                  : parallel_map(static_cast<std::size_t>(cfg.folds), fit_fold, cfg.threads);

  CurveResult res;
  EifMatrix& m = res.eif;
  m = EifMatrix(cfg.arms, cfg.causes, grid, ds.size());
  m.kappa = ds.kappa();
  const EifForm form = cfg.form.value_or(default_form(ds.causes()));
  CurveEstimate& curve = res.curve;
  if (cfg.serial)
    fill_eif_serial(m, ds, folds, bundles, form, curve.truncation_counts);
  else
    fill_eif_parallel(m, ds, folds, bundles, form, curve.truncation_counts, cfg.threads);

  curve.grid = grid;
  curve.arms = cfg.arms;
  curve.causes = cfg.causes;
  curve.folds = cfg.folds;
  curve.seed = cfg.seed;
  curve.level = cfg.level;
  curve.band_draws = cfg.band_draws;
  curve.truncation = bundles.front()->truncation();
  curve.sensitivity = cfg.sensitivity;
  curve.n = ds.size();
  curve.n_historical = ds.n_historical();
  curve.n_bridging = ds.n_bridging();
  curve.points.resize(m.columns());

  const double z = normal_critical(cfg.level);
  for (std::size_t a = 0; a < cfg.arms.size(); ++a) {
    for (std::size_t c = 0; c < cfg.causes.size(); ++c) {
      const BandResult band =
          uniform_band(m, a, c, cfg.level, cfg.band_draws,
                       derive_seed(cfg.seed, {0xBA4D, static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(c)}),
                       cfg.threads, cfg.serial);
      curve.band_quantile.push_back(band.quantile);
      for (std::size_t t = 0; t < grid.size(); ++t) {
        const std::size_t col = m.column(a, c, t);
        CurvePoint& p = curve.at(a, c, t);
        p.arm = cfg.arms[a];
        p.cause = cfg.causes[c];
        p.time = grid[t];
        p.estimate = m.estimates[col];
        p.se = eif_standard_error(m, col);
        p.ci_lo = p.estimate - z * p.se;
        p.ci_hi = p.estimate + z * p.se;
        p.band_lo = p.estimate - band.half_width[t];
        p.band_hi = p.estimate + band.half_width[t];
      }
    }
  }

  if (!cfg.sensitivity.identity()) {
    const SensitivitySpec& s = cfg.sensitivity;
    if (!(s.rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
    bool clamped = false;
    for (auto& p : curve.points) {
      const double raw = p.estimate;
      p.estimate = s.apply(raw);
      p.se = std::abs(s.derivative(raw)) * p.se;
      p.ci_lo = s.apply(p.ci_lo);
      p.ci_hi = s.apply(p.ci_hi);
      p.band_lo = s.apply(p.band_lo);
      p.band_hi = s.apply(p.band_hi);
      const double r = clip_risk(raw);
      clamped = clamped || s.rho * logistic(std::log(r / (1.0 - r)) + s.h_offset) > 1.0;
    }
    if (clamped) curve.warnings.push_back("sensitivity adjustment clamped at 1 for some grid times");
  }
  monotone_correct(curve);
  return res;
}

// ---------------------------------------------------------------------------

RelVeEstimate relative_ve(const EifMatrix& m, std::size_t cause_index, double level) {
  std::optional<std::size_t> a1, a1p;
  for (std::size_t a = 0; a < m.arms.size(); ++a) {
    if (m.arms[a] == Arm::Approved) a1 = a;
    if (m.arms[a] == Arm::Investigational) a1p = a;
  }
  if (!a1 || !a1p) throw Error(ErrorCode::InvalidArgument, "relative VE needs estimates for arms 1 and 1p");
  const double z = normal_critical(level);
  const double n = static_cast<double>(m.rows);
  RelVeEstimate out;
  out.cause = m.causes.at(cause_index);
  out.level = level;
  bool any = false;
  for (std::size_t t = 0; t < m.grid.size(); ++t) {
    const std::size_t c1 = m.column(*a1, cause_index, t), c1p = m.column(*a1p, cause_index, t);
    RelVePoint p;
    p.time = m.grid[t];
    p.r_approved = m.estimates[c1];
    p.r_investigational = m.estimates[c1p];
    if (p.r_approved <= kDenominatorEpsilon) {
      p.defined = false;
      out.points.push_back(p);
      continue;
    }
    any = true;
    const double r1 = p.r_approved, r1p = p.r_investigational;
    const double ratio = r1p / r1;
    p.relve = 1.0 - ratio;
    p.degenerate = std::abs(r1 - r1p) <= 1e-12;
    if (!p.degenerate) {
      CompensatedSum s;
      for (std::size_t r = 0; r < m.rows; ++r) {
        const double psi = (m.centered(r, c1p) - ratio * m.centered(r, c1)) / (r1 - r1p);
        s.add(psi * psi);
      }
      p.se_log_relve = std::sqrt(s.value() / n / n);
    }
    if (r1p > 0.0) {
      CompensatedSum s;
      for (std::size_t r = 0; r < m.rows; ++r) {
        const double psi = m.centered(r, c1p) / r1p - m.centered(r, c1) / r1;
        s.add(psi * psi);
      }
      p.se_log_rr = std::sqrt(s.value() / n / n);
      p.ci_lo = 1.0 - ratio * std::exp(z * *p.se_log_rr);
      p.ci_hi = 1.0 - ratio * std::exp(-z * *p.se_log_rr);
    } else {
      CompensatedSum s;
      for (std::size_t r = 0; r < m.rows; ++r) {
        const double psi = (m.centered(r, c1p) - ratio * m.centered(r, c1)) / r1;
        s.add(psi * psi);
      }
      const double se = std::sqrt(s.value() / n / n);
      p.ci_lo = p.relve - z * se;
      p.ci_hi = std::min(1.0, p.relve + z * se);
    }
    out.points.push_back(p);
  }
  if (!any) throw Error(ErrorCode::DenominatorNearZero, "R(1, t) is at most 1e-6 at every grid time");
  return out;
}

FusedDataset stratified_resample(const FusedDataset& ds, std::uint64_t seed) {
  std::vector<std::size_t> cells[2][3];
  for (std::size_t i = 0; i < ds.size(); ++i)
    cells[static_cast<int>(ds[i].trial)][static_cast<int>(ds[i].arm)].push_back(i);
  Engine eng(seed);
  std::vector<SubjectRecord> out;
  out.reserve(ds.size());
  double max_time = 0.0;
  for (auto& trial : cells)
    for (auto& cell : trial) {
      if (cell.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, cell.size() - 1);
      for (std::size_t k = 0; k < cell.size(); ++k) {
        out.push_back(ds[cell[pick(eng)]]);
        if (out.back().time) max_time = std::max(max_time, *out.back().time);
      }
    }
  return FusedDataset(std::move(out), ds.causes(), std::min(ds.horizon(), max_time));
}

BootstrapSe bootstrap_relve(const FusedDataset& ds, const EstimatorConfig& cfg, std::size_t replicates,
                            std::uint64_t seed) {
  EstimatorConfig inner = cfg;
  inner.arms = {Arm::Approved, Arm::Investigational};
  inner.band_draws = 0;
  inner.threads = 1;
  if (inner.grid.empty()) inner.grid = default_grid(ds);
  struct Rep {
    bool ok = false;
    std::vector<double> relve, log_rr;
  };
  std::function<Rep(std::size_t)> task = [&](std::size_t b) {
    Rep rep;
    try {
      const FusedDataset boot = stratified_resample(ds, derive_seed(seed, {b}));
      EstimatorConfig c = inner;
      c.seed = derive_seed(seed, {b, 1});
      const auto res = estimate_curve(boot, c);
      const auto rv = relative_ve(res.eif, 0, cfg.level);
      for (const auto& p : rv.points) {
        rep.relve.push_back(p.defined ? p.relve : std::nan(""));
        rep.log_rr.push_back(p.defined && p.r_investigational > 0.0 ? std::log(1.0 - p.relve) : std::nan(""));
      }
      rep.ok = true;
    } catch (const Error&) {
    }
    return rep;
  };
  const auto reps = cfg.serial ? serial_map(replicates, task) : parallel_map(replicates, task, cfg.threads);
  BootstrapSe out;
  const std::size_t T = inner.grid.size();
  std::vector<std::vector<double>> logs(T), raw(T), rr(T);
  for (const auto& r : reps) {
    if (!r.ok) {
      ++out.failures;
      continue;
    }
    ++out.replicates;
    for (std::size_t t = 0; t < T && t < r.relve.size(); ++t) {
      if (!std::isnan(r.log_rr[t])) rr[t].push_back(r.log_rr[t]);
      if (std::isnan(r.relve[t])) continue;
      raw[t].push_back(r.relve[t]);
      if (r.relve[t] > 0.0) logs[t].push_back(std::log(r.relve[t]));
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    out.se_log_relve.push_back(sample_sd(logs[t]));
    out.se_relve.push_back(sample_sd(raw[t]));
    out.se_log_rr.push_back(sample_sd(rr[t]));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

FeatureSpec without_arm_terms(const FeatureSpec& spec) {
  std::vector<FeatureTerm> kept;
  for (const auto& term : spec.terms())
    if (!term.uses_arm()) kept.push_back(term);
  return FeatureSpec(std::move(kept));
}

struct NcdeSplit {
  std::vector<SubjectRecord> fused;
  std::vector<SubjectRecord> investigational;  // with outcomes, for the actual incidence
};

NcdeSplit split_arms(std::span<const SubjectRecord> rows) {
  NcdeSplit s;
  for (const auto& r : rows) {
    if (!r.time || !r.delta)
      throw Error(ErrorCode::MissingValue, "the no-direct-effect test needs outcomes in both arms");
    SubjectRecord h = r;
    h.trial = Trial::Historical;
    if (r.arm == Arm::Approved) {
      s.fused.push_back(h);
    } else if (r.arm == Arm::Investigational) {
      s.investigational.push_back(h);
    } else {
      throw Error(ErrorCode::BadArmCode, "the no-direct-effect test uses arms 1 and 1p only");
    }
  }
  for (const auto& r : s.investigational) {
    SubjectRecord b = r;
    b.trial = Trial::Bridging;
    b.time.reset();
    b.delta.reset();
    s.fused.push_back(std::move(b));
  }
  return s;
}

std::pair<double, double> ncde_pair(std::span<const SubjectRecord> rows, int causes, double horizon,
                                    const NcdeConfig& cfg, const EstimatorConfig& est) {
  const NcdeSplit split = split_arms(rows);
  const FusedDataset ds(split.fused, causes, horizon);
  const auto res = estimate_curve(ds, est);
  const double cf = res.curve.points.front().estimate;
  const double actual = ipcw_incidence(split.investigational, cfg.t_star, est.spec.censoring, est.spec.truncation.censoring);
  return {cf, actual};
}

}  // namespace

double ipcw_incidence(std::span<const SubjectRecord> rows, double t, const FeatureSpec& censoring, double floor) {
  std::vector<SubjectRecord> recs(rows.begin(), rows.end());
  for (auto& r : recs) r.trial = Trial::Historical;
  std::vector<std::size_t> idx(recs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const SurvivalFit fit = fit_survival(SurvivalKind::Censoring, 0, recs, idx, without_arm_terms(censoring));
  CompensatedSum s;
  for (const auto& r : recs) {
    if (*r.delta == 1 && *r.time <= t)
      s.add(1.0 / std::max(fit.survival_before(*r.time, r.x, r.s, r.arm == Arm::Approved), floor));
  }
  return s.value() / static_cast<double>(recs.size());
}

NcdeTestResult ncde_test(std::span<const SubjectRecord> rows, int causes, double horizon, const NcdeConfig& cfg) {
  if (!(cfg.t_star > 0.0) || cfg.t_star > horizon)
    throw Error(ErrorCode::GridBeyondHorizon, "t_star " + format_double(cfg.t_star) + " outside (0, " +
                                                  format_double(horizon) + "]");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (cfg.bootstrap < 200) throw Error(ErrorCode::InvalidArgument, "the no-direct-effect test needs B >= 200 resamples");
  int events[3] = {0, 0, 0};
  for (const auto& r : rows)
    if (r.delta && *r.delta == 1 && r.time && *r.time <= cfg.t_star) ++events[static_cast<int>(r.arm)];
  if (events[1] < cfg.min_events || events[2] < cfg.min_events)
    throw Error(ErrorCode::InsufficientEvents, "fewer than " + std::to_string(cfg.min_events) +
                                                   " events by t_star in arm 1 or arm 1p");

  EstimatorConfig est = cfg.estimator;
  est.grid = {cfg.t_star};
  est.arms = {Arm::Investigational};
  est.causes = {1};
  est.band_draws = 0;
  for (auto& e : est.spec.event) e = without_arm_terms(e);
  est.spec.censoring = without_arm_terms(est.spec.censoring);

  NcdeTestResult out;
  out.t_star = cfg.t_star;
  out.alpha = cfg.alpha;
  std::tie(out.counterfactual, out.actual) = ncde_pair(rows, causes, horizon, cfg, est);
  out.difference = out.counterfactual - out.actual;

  std::vector<std::size_t> arm1, arm1p;
  for (std::size_t i = 0; i < rows.size(); ++i) (rows[i].arm == Arm::Approved ? arm1 : arm1p).push_back(i);
  EstimatorConfig inner = est;
  inner.threads = 1;
  std::function<std::optional<double>(std::size_t)> task = [&](std::size_t b) -> std::optional<double> {
    Engine eng(derive_seed(est.seed, {0x9CDE, b}));
    std::vector<SubjectRecord> boot;
    boot.reserve(rows.size());
    for (const auto* cell : {&arm1, &arm1p}) {
      std::uniform_int_distribution<std::size_t> pick(0, cell->size() - 1);
      for (std::size_t k = 0; k < cell->size(); ++k) boot.push_back(rows[(*cell)[pick(eng)]]);
    }
    double max_time = 0.0;
    for (const auto& r : boot) max_time = std::max(max_time, *r.time);
    try {
      EstimatorConfig c = inner;
      c.seed = derive_seed(est.seed, {0x9CDE, b, 1});
      const auto [cf, actual] = ncde_pair(boot, causes, std::min(horizon, max_time), cfg, c);
      return cf - actual;
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  const auto diffs = est.serial ? serial_map(cfg.bootstrap, task) : parallel_map(cfg.bootstrap, task, est.threads);
  std::vector<double> ok;
  for (const auto& d : diffs) {
    if (d)
      ok.push_back(*d);
    else
      ++out.failures;
  }
  out.bootstrap = ok.size();
  if (ok.size() < 2) throw Error(ErrorCode::InsufficientEvents, "bootstrap replicates failed");
  std::sort(ok.begin(), ok.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(ok.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, ok.size() - 1);
    return ok[lo] + (pos - static_cast<double>(lo)) * (ok[hi] - ok[lo]);
  };
  out.ci_lo = quantile(cfg.alpha / 2.0);
  out.ci_hi = quantile(1.0 - cfg.alpha / 2.0);
  out.reject = out.ci_lo > 0.0 || out.ci_hi < 0.0;
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::AllCorrect: return "all_correct";
    case Scenario::Ma: return "Ma";
    case Scenario::Mb: return "Mb";
    case Scenario::Mc: return "Mc";
    case Scenario::NoneCorrect: return "none_correct";
  }
  return "?";
}

Scenario parse_scenario(const std::string& text) {
  for (Scenario s : {Scenario::AllCorrect, Scenario::Ma, Scenario::Mb, Scenario::Mc, Scenario::NoneCorrect})
    if (to_string(s) == text) return s;
  throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + text + "'");
}

NuisanceSpec scenario_spec(Scenario s, const NuisanceSpec& correct) {
  if (s == Scenario::AllCorrect) return correct;
  NuisanceSpec out = correct;
  const FeatureSpec wrong;
  const bool event_ok = s == Scenario::Ma || s == Scenario::Mb;
  const bool bridging_density_ok = s == Scenario::Ma || s == Scenario::Mc;
  const bool arm_ok = s == Scenario::Mb || s == Scenario::Mc;
  const bool rest_ok = s == Scenario::Mc;
  if (!event_ok)
    for (auto& e : out.event) e = wrong;
  if (!bridging_density_ok) out.marker_bridging = wrong;
  if (!arm_ok) out.arm_propensity = wrong;
  if (!rest_ok) {
    out.gamma_propensity = wrong;
    out.historical_approved_propensity = wrong;
    out.marker_historical = wrong;
    out.censoring = wrong;
  }
  return out;
}

}  // namespace fusioncurve
