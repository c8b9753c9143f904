#include "fusioncurve/eif.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "fusioncurve/error.hpp"
#include "fusioncurve/numeric.hpp"

namespace fusioncurve {

TruncationCounts& TruncationCounts::operator+=(const TruncationCounts& o) {
  propensity += o.propensity;
  censoring += o.censoring;
  density_ratio += o.density_ratio;
  weights += o.weights;
  return *this;
}

void check_fold(const Nuisance& nu, int row_fold) {
  const auto held = nu.held_out_fold();
  if (held && *held != row_fold)
    throw Error(ErrorCode::FoldMismatch, "bundle trained without fold " + std::to_string(*held) +
                                             " applied to a row of fold " + std::to_string(row_fold));
}

namespace {

double floored(double v, double floor, std::size_t* hits) {
  if (v < floor || (floor > 0.0 && v <= floor)) {
    if (hits) ++*hits;
    return std::max(v, floor);
  }
  return v;
}

/// f(Gamma=1|x) / f(A=1,Gamma=0|x) * min(density ratio, cap) / kappa
double historical_weight(const Nuisance& nu, const SubjectRecord& r, Arm a, TruncationCounts* counts) {
  const Truncation tr = nu.truncation();
  if (counts) ++counts->weights;
  const double pg = nu.prob_bridging(r.x);
  const double ph = floored(nu.prob_historical_approved(r.x), tr.propensity, counts ? &counts->propensity : nullptr);
  const double num = nu.marker_density(r.s, r.x, Trial::Bridging, a);
  const double den = nu.marker_density(r.s, r.x, Trial::Historical, Arm::Approved);
  double ratio = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
  if (ratio > tr.density_ratio) {
    if (counts) ++counts->density_ratio;
    ratio = tr.density_ratio;
  }
  return pg / ph * ratio / nu.kappa();
}

double arm_propensity(const Nuisance& nu, Arm a, std::span<const double> x, TruncationCounts* counts) {
  const double p = nu.prob_arm_bridging(a, x);
  if (p <= 0.0) throw Error(ErrorCode::NoArmRows, "arm " + std::string(arm_code(a)) + " has no bridging rows");
  return floored(p, nu.truncation().propensity, counts ? &counts->propensity : nullptr);
}

/// F^j(t | x, 1, s) for every (cause, time); cause 0 is all-cause.
void risk_values(const Nuisance& nu, std::span<const double> x, std::span<const double> s,
                 std::span<const int> causes, std::span<const double> grid, std::span<double> out) {
  const std::size_t T = grid.size();
  if (nu.causes() == 1) {
    for (std::size_t c = 0; c < causes.size(); ++c)
      nu.event_cif(x, s, 1, grid, out.subspan(c * T, T));
    return;
  }
  const EventCurve curve = nu.event_curve(x, s);
  for (std::size_t c = 0; c < causes.size(); ++c) {
    for (std::size_t i = 0; i < T; ++i)
      out[c * T + i] = causes[c] == 0 ? 1.0 - curve.survival(grid[i]) : curve.cif(causes[c], grid[i]);
  }
}

/// Marker integral of the risk over f(s | x, A = a, Gamma = 1).
void integrated_risk(const Nuisance& nu, std::span<const double> x, Arm a, std::span<const int> causes,
                     std::span<const double> grid, std::span<double> out) {
  const MarkerNodes nodes = nu.marker_nodes(x, a);
  std::vector<double> values(out.size());
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (nodes.weights[n] == 0.0) continue;
    risk_values(nu, x, nodes.point(n), causes, grid, values);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += nodes.weights[n] * values[i];
  }
}

void validate(const Nuisance& nu, std::span<const int> causes, EifForm form) {
  for (int j : causes)
    if (j < 1 || j > nu.causes())
      throw Error(ErrorCode::CauseOutOfRange, "cause " + std::to_string(j) + " outside 1.." + std::to_string(nu.causes()));
  if (form == EifForm::Censored && nu.causes() != 1)
    throw Error(ErrorCode::InvalidArgument, "the single-endpoint censored form needs J = 1; use the competing form");
}

void historical_terms(const Nuisance& nu, const SubjectRecord& r, double w, std::span<const double> grid,
                      std::span<const int> causes, EifForm form, std::span<EifTerms> out, TruncationCounts* counts) {
  const EventCurve curve = nu.event_curve(r.x, r.s);
  const std::size_t T = grid.size();
  const double tt = *r.time;
  const int delta = *r.delta;

  if (form == EifForm::Complete) {
    // A row censored after t still determines y; one censored at or before t does not.
    for (std::size_t c = 0; c < causes.size(); ++c)
      for (std::size_t i = 0; i < T; ++i) {
        if (delta == 0 && tt <= grid[i])
          throw Error(ErrorCode::BadValue, "complete-data influence function given a row censored by t");
        const double y = (tt <= grid[i] && delta == causes[c]) ? 1.0 : 0.0;
        out[c * T + i].weighting = w * (y - curve.cif(causes[c], grid[i]));
      }
    return;
  }

  const Truncation tr = nu.truncation();
  std::size_t* hits = counts ? &counts->censoring : nullptr;
  const std::size_t J = curve.causes();
  const std::size_t at_risk = curve.count_upto(tt);
  // Prefix sums over jumps u_i <= T~:
  //   D   = sum dL(u)/(G(u) Gc(u-))
  //   A_j = sum dL^j(u)/Gc(u-)
  //   C_j = sum F^j(u) dL(u)/(G(u) Gc(u-))
  std::vector<double> D(at_risk + 1, 0.0), A((at_risk + 1) * J, 0.0), C((at_risk + 1) * J, 0.0);
  std::vector<double> gcs(at_risk);
  nu.censoring_survival_before_many(curve.times().first(at_risk), r.x, r.s, gcs);
  for (std::size_t i = 0; i < at_risk; ++i) {
    const double gc = floored(gcs[i], tr.censoring, hits);
    const double g = curve.survival_at(i);
    const double inv = g > 0.0 ? curve.total_hazard(i) / (g * gc) : 0.0;
    D[i + 1] = D[i] + inv;
    for (std::size_t k = 0; k < J; ++k) {
      A[(i + 1) * J + k] = A[i * J + k] + curve.hazard(i, static_cast<int>(k + 1)) / gc;
      C[(i + 1) * J + k] = C[i * J + k] + curve.cif_at(i, static_cast<int>(k + 1)) * inv;
    }
  }
  double gc_event = 1.0, g_event = 1.0;
  if (delta >= 1) {
    gc_event = floored(nu.censoring_survival_before(tt, r.x, r.s), tr.censoring, hits);
    g_event = curve.survival(tt);
  }

  for (std::size_t i = 0; i < T; ++i) {
    const double t = grid[i];
    const std::size_t m = curve.count_upto(std::min(t, tt));
    const bool event_by_t = delta >= 1 && tt <= t;
    if (form == EifForm::Censored) {
      const double gt = curve.survival(t);
      double braces = gt * D[m];
      if (event_by_t && g_event > 0.0) braces -= gt / (g_event * gc_event);
      out[i].weighting = -w * braces;
      continue;
    }
    for (std::size_t c = 0; c < causes.size(); ++c) {
      const int j = causes[c];
      const std::size_t k = static_cast<std::size_t>(j - 1);
      const double ft = curve.cif(j, t);
      double v = -A[m * J + k] + ft * D[m] - C[m * J + k];
      if (event_by_t) {
        const double tail = g_event > 0.0 ? (ft - curve.cif(j, tt)) / g_event : 0.0;
        v += ((delta == j ? 1.0 : 0.0) - tail) / gc_event;
      }
      out[c * T + i].weighting = w * v;
    }
  }
}

void evaluate(const Nuisance& nu, const SubjectRecord& r, Arm a, std::span<const double> grid,
              std::span<const int> causes, EifForm form, std::span<EifTerms> out, TruncationCounts* counts) {
  validate(nu, causes, form);
  std::fill(out.begin(), out.end(), EifTerms{});
  if (r.historical()) {
    if (r.arm != Arm::Approved) return;
    const double w = historical_weight(nu, r, a, counts);
    historical_terms(nu, r, w, grid, causes, form, out, counts);
    return;
  }
  const double kappa = nu.kappa();
  std::vector<double> integral(out.size());
  integrated_risk(nu, r.x, a, causes, grid, integral);
  std::vector<double> own;
  double p = 1.0;
  if (r.arm == a) {
    p = arm_propensity(nu, a, r.x, counts);
    own.resize(out.size());
    risk_values(nu, r.x, r.s, causes, grid, own);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (form == EifForm::Censored) {
      // survival scale: 1 - int G f, and -(G(S) - int G f)
      const double g_int = 1.0 - integral[i];
      out[i].integral = (1.0 - g_int) / kappa;
      if (!own.empty()) out[i].residual = -((1.0 - own[i]) - g_int) / (kappa * p);
    } else {
      out[i].integral = integral[i] / kappa;
      if (!own.empty()) out[i].residual = (own[i] - integral[i]) / (kappa * p);
    }
  }
}

}  // namespace

void eif_row(const Nuisance& nu, const SubjectRecord& r, Arm a, std::span<const double> grid,
             std::span<const int> causes, EifForm form, std::span<double> out, TruncationCounts* counts) {
  if (out.size() != grid.size() * causes.size())
    throw Error(ErrorCode::InvalidArgument, "eif_row output has the wrong size");
  std::vector<EifTerms> terms(out.size());
  evaluate(nu, r, a, grid, causes, form, terms, counts);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = terms[i].total();
}

EifTerms eif_terms(const Nuisance& nu, const SubjectRecord& r, Arm a, double t, int cause, EifForm form) {
  EifTerms terms;
  const double grid[1] = {t};
  const int causes[1] = {cause};
  evaluate(nu, r, a, grid, causes, form, std::span<EifTerms>(&terms, 1), nullptr);
  return terms;
}

double eif_censored_row(const Nuisance& nu, const SubjectRecord& r, Arm a, double t) {
  return eif_terms(nu, r, a, t, 1, EifForm::Censored).total();
}

double eif_competing_row(const Nuisance& nu, const SubjectRecord& r, Arm a, double t, int cause) {
  return eif_terms(nu, r, a, t, cause, EifForm::Competing).total();
}

double eif_complete_row(const Nuisance& nu, const SubjectRecord& r, Arm a, double t, int cause) {
  return eif_terms(nu, r, a, t, cause, EifForm::Complete).total();
}

// ---------------------------------------------------------------------------

namespace {

PluginEstimate summarize(const std::vector<double>& terms) {
  PluginEstimate est;
  est.value = mean(terms);
  est.se = sample_sd(terms) / std::sqrt(static_cast<double>(terms.size()));
  return est;
}

void check_cause(const Nuisance& nu, int cause) {
  if (cause < 0 || cause > nu.causes())
    throw Error(ErrorCode::CauseOutOfRange, "cause " + std::to_string(cause) + " outside 0.." + std::to_string(nu.causes()));
}

}  // namespace

PluginEstimate plugin_mediation(const Nuisance& nu, const FusedDataset& ds, Arm a, double t, int cause) {
  check_cause(nu, cause);
  if (ds.n_bridging() == 0) throw Error(ErrorCode::NoBridgingRows, "no bridging rows");
  const double grid[1] = {t};
  const int causes[1] = {cause};
  std::vector<double> terms;
  terms.reserve(ds.n_bridging());
  for (const auto& r : ds.records()) {
    if (!r.bridging()) continue;
    double v = 0.0;
    integrated_risk(nu, r.x, a, causes, grid, std::span<double>(&v, 1));
    terms.push_back(v);
  }
  return summarize(terms);
}

PluginEstimate plugin_outcome(const Nuisance& nu, const FusedDataset& ds, Arm a, double t, int cause) {
  check_cause(nu, cause);
  if (ds.count(Trial::Bridging, a) == 0)
    throw Error(ErrorCode::NoArmRows, "arm " + std::string(arm_code(a)) + " has no bridging rows");
  const double grid[1] = {t};
  const int causes[1] = {cause};
  std::vector<double> terms;
  terms.reserve(ds.n_bridging());
  for (const auto& r : ds.records()) {
    if (!r.bridging()) continue;
    double v = 0.0;
    if (r.arm == a) {
      risk_values(nu, r.x, r.s, causes, grid, std::span<double>(&v, 1));
      v /= arm_propensity(nu, a, r.x, nullptr);
    }
    terms.push_back(v);
  }
  return summarize(terms);
}

PluginEstimate plugin_weighting(const Nuisance& nu, const FusedDataset& ds, Arm a, double t, int cause) {
  check_cause(nu, cause);
  if (ds.count(Trial::Historical, Arm::Approved) == 0)
    throw Error(ErrorCode::NoHistoricalApprovedRows, "no historical approved-arm rows");
  const Truncation tr = nu.truncation();
  std::vector<double> terms;
  terms.reserve(ds.size());
  for (const auto& r : ds.records()) {
    double v = 0.0;
    if (r.historical() && r.arm == Arm::Approved) {
      const bool hit = *r.time <= t && (cause == 0 ? *r.delta >= 1 : *r.delta == cause);
      if (hit) {
        const double gc = std::max(nu.censoring_survival_before(*r.time, r.x, r.s), tr.censoring);
        v = historical_weight(nu, r, a, nullptr) / gc;
      }
    }
    terms.push_back(v);
  }
  PluginEstimate est = summarize(terms);
  if (est.value == 0.0)
    est.warnings.push_back("LowInformation: no uncensored historical approved-arm events by t = " + format_double(t));
  return est;
}

EventCurve PooledNuisance::event_curve(std::span<const double> x, std::span<const double> s) const {
  const EventCurve curve = inner_.event_curve(x, s);
  std::vector<double> times(curve.times().begin(), curve.times().end());
  std::vector<double> hazards(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) hazards[i] = curve.total_hazard(i);
  return EventCurve(std::move(times), 1, std::move(hazards));
}

SumCheckReport check_sum_to_allcause(const Nuisance& nu, const FusedDataset& ds, Arm a, double t, double tolerance) {
  SumCheckReport rep;
  rep.tolerance = tolerance;
  const int J = nu.causes();
  const double grid[1] = {t};
  for (int j = 1; j <= J; ++j) rep.cause_plugins.push_back(plugin_mediation(nu, ds, a, t, j).value);
  rep.allcause_plugin = plugin_mediation(nu, ds, a, t, 0).value;

  std::vector<int> causes(static_cast<std::size_t>(J));
  for (int j = 1; j <= J; ++j) causes[static_cast<std::size_t>(j - 1)] = j;
  const PooledNuisance pooled(nu);
  const int one[1] = {1};
  std::vector<CompensatedSum> sums(causes.size());
  CompensatedSum all;
  std::vector<double> row(causes.size());
  for (const auto& r : ds.records()) {
    eif_row(nu, r, a, grid, causes, EifForm::Competing, row);
    for (std::size_t c = 0; c < causes.size(); ++c) sums[c].add(row[c]);
    SubjectRecord collapsed = r;
    if (collapsed.delta) collapsed.delta = std::min(*collapsed.delta, 1);
    double v = 0.0;
    eif_row(pooled, collapsed, a, grid, one, EifForm::Competing, std::span<double>(&v, 1));
    all.add(v);
  }
  const double n = static_cast<double>(ds.size());
  for (auto& s : sums) rep.cause_eif_means.push_back(s.value() / n);
  rep.allcause_eif_mean = all.value() / n;

  CompensatedSum ps, es;
  for (double v : rep.cause_plugins) ps.add(v);
  for (double v : rep.cause_eif_means) es.add(v);
  rep.plugin_sum = ps.value();
  rep.eif_sum = es.value();
  rep.pass = std::abs(rep.plugin_sum - rep.allcause_plugin) <= tolerance &&
             std::abs(rep.eif_sum - rep.allcause_eif_mean) <= tolerance;
  return rep;
}

// ---------------------------------------------------------------------------

EifMatrix::EifMatrix(std::vector<Arm> arms_, std::vector<int> causes_, std::vector<double> grid_, std::size_t rows_)
    : arms(std::move(arms_)), causes(std::move(causes_)), grid(std::move(grid_)), rows(rows_) {
  values.assign(rows * columns(), 0.0);
  estimates.assign(columns(), 0.0);
  bridging.assign(rows, 0);
}

void EifMatrix::compute_estimates() {
  const std::size_t C = columns();
  std::vector<CompensatedSum> sums(C);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < C; ++c) sums[c].add(values[r * C + c]);
  estimates.resize(C);
  for (std::size_t c = 0; c < C; ++c) estimates[c] = sums[c].value() / static_cast<double>(rows);
}

void write_eif_csv(const EifMatrix& m, std::ostream& out) {
  out << "subject_id,arm,time,cause,phi\n";
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t a = 0; a < m.arms.size(); ++a)
      for (std::size_t c = 0; c < m.causes.size(); ++c)
        for (std::size_t i = 0; i < m.grid.size(); ++i)
          out << r + 1 << ',' << arm_code(m.arms[a]) << ',' << format_double(m.grid[i]) << ',' << m.causes[c] << ','
              << format_double(m.at(r, m.column(a, c, i))) << '\n';
}

}  // namespace fusioncurve
