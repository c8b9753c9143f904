#include "fusioncurve/report.hpp"

#include "fusioncurve/numeric.hpp"

namespace fusioncurve {

using nlohmann::json;

namespace {

std::string fmt(double v) { return format_double(v); }

json arms_json(std::span<const Arm> arms) {
  json a = json::array();
  for (Arm arm : arms) a.push_back(std::string(arm_code(arm)));
  return a;
}

}  // namespace

void write_curve_csv(const CurveEstimate& curve, std::ostream& out) {
  out << "arm,cause,time,estimate,se,ci_lo,ci_hi,band_lo,band_hi,"
         "mono_estimate,mono_ci_lo,mono_ci_hi,mono_band_lo,mono_band_hi\n";
  for (const auto& p : curve.points) {
    out << arm_code(p.arm) << ',' << p.cause << ',' << fmt(p.time) << ',' << fmt(p.estimate) << ',' << fmt(p.se)
        << ',' << fmt(p.ci_lo) << ',' << fmt(p.ci_hi) << ',' << fmt(p.band_lo) << ',' << fmt(p.band_hi) << ','
        << fmt(p.mono_estimate) << ',' << fmt(p.mono_ci_lo) << ',' << fmt(p.mono_ci_hi) << ','
        << fmt(p.mono_band_lo) << ',' << fmt(p.mono_band_hi) << '\n';
  }
}

void write_relve_csv(const RelVeEstimate& rv, std::ostream& out) {
  out << "cause,time,r_approved,r_investigational,relve,defined,se_log_rr,se_log_relve,ci_lo,ci_hi,degenerate\n";
  for (const auto& p : rv.points) {
    out << rv.cause << ',' << fmt(p.time) << ',' << fmt(p.r_approved) << ',' << fmt(p.r_investigational) << ',';
    if (p.defined)
      out << fmt(p.relve) << ",1,";
    else
      out << ",0,";
    out << (p.se_log_rr ? fmt(*p.se_log_rr) : "") << ',' << (p.se_log_relve ? fmt(*p.se_log_relve) : "") << ',';
    if (p.defined) out << fmt(p.ci_lo) << ',' << fmt(p.ci_hi);
    else out << ',';
    out << ',' << (p.degenerate ? 1 : 0) << '\n';
  }
}

void write_table1_csv(std::span<const sim::SummaryRow> rows, std::ostream& out) {
  out << "n_h,c,mean,median,bias,pct_bias,rmse,avg_se,coverage\n";
  for (const auto& r : rows)
    out << r.n_h << ',' << fmt(r.c) << ',' << fmt(r.mean) << ',' << fmt(r.median) << ',' << fmt(r.bias) << ','
        << fmt(r.pct_bias) << ',' << fmt(r.rmse) << ',' << fmt(r.avg_se) << ',' << fmt(r.coverage) << '\n';
}

json to_json(const CurveEstimate& curve) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "curve";
  j["grid"] = curve.grid;
  j["arms"] = arms_json(curve.arms);
  j["causes"] = curve.causes;
  j["metadata"] = {
      {"folds", curve.folds},
      {"seed", curve.seed},
      {"level", curve.level},
      {"band_draws", curve.band_draws},
      {"band_quantile", curve.band_quantile},
      {"n", curve.n},
      {"n_historical", curve.n_historical},
      {"n_bridging", curve.n_bridging},
      {"truncation",
       {{"propensity", curve.truncation.propensity},
        {"censoring", curve.truncation.censoring},
        {"density_ratio", curve.truncation.density_ratio}}},
      {"truncation_counts",
       {{"propensity", curve.truncation_counts.propensity},
        {"censoring", curve.truncation_counts.censoring},
        {"density_ratio", curve.truncation_counts.density_ratio},
        {"weights", curve.truncation_counts.weights}}},
      {"sensitivity", {{"rho", curve.sensitivity.rho}, {"h_offset", curve.sensitivity.h_offset}}},
  };
  json pts = json::array();
  for (const auto& p : curve.points) {
    pts.push_back({{"arm", std::string(arm_code(p.arm))},
                   {"cause", p.cause},
                   {"time", p.time},
                   {"estimate", p.estimate},
                   {"se", p.se},
                   {"ci", {p.ci_lo, p.ci_hi}},
                   {"band", {p.band_lo, p.band_hi}},
                   {"mono_estimate", p.mono_estimate},
                   {"mono_ci", {p.mono_ci_lo, p.mono_ci_hi}},
                   {"mono_band", {p.mono_band_lo, p.mono_band_hi}}});
  }
  j["points"] = std::move(pts);
  j["warnings"] = curve.warnings;
  return j;
}

json to_json(const RelVeEstimate& rv, const BootstrapSe* boot) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "relve";
  j["cause"] = rv.cause;
  j["level"] = rv.level;
  json pts = json::array();
  for (std::size_t i = 0; i < rv.points.size(); ++i) {
    const auto& p = rv.points[i];
    json q = {{"time", p.time},
              {"r_approved", p.r_approved},
              {"r_investigational", p.r_investigational},
              {"defined", p.defined},
              {"degenerate", p.degenerate}};
    q["relve"] = p.defined ? json(p.relve) : json(nullptr);
    q["se_log_rr"] = p.se_log_rr ? json(*p.se_log_rr) : json(nullptr);
    q["se_log_relve"] = p.se_log_relve ? json(*p.se_log_relve) : json(nullptr);
    q["ci"] = p.defined ? json::array({p.ci_lo, p.ci_hi}) : json(nullptr);
    if (boot && i < boot->se_log_rr.size()) {
      q["bootstrap_se_log_rr"] = boot->se_log_rr[i];
      q["bootstrap_se_relve"] = boot->se_relve[i];
    }
    pts.push_back(std::move(q));
  }
  j["points"] = std::move(pts);
  if (boot) j["bootstrap"] = {{"replicates", boot->replicates}, {"failures", boot->failures}};
  return j;
}

json to_json(const NcdeTestResult& r) {
  return {{"schema_version", kSchemaVersion},
          {"kind", "ncde_test"},
          {"t_star", r.t_star},
          {"counterfactual", r.counterfactual},
          {"actual", r.actual},
          {"difference", r.difference},
          {"ci", {r.ci_lo, r.ci_hi}},
          {"alpha", r.alpha},
          {"bootstrap", r.bootstrap},
          {"failures", r.failures},
          {"reject", r.reject}};
}

json table1_json(std::span<const sim::SummaryRow> rows) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "table1";
  j["scale"] = "survival";
  json r = json::array();
  for (const auto& row : rows)
    r.push_back({{"n_h", row.n_h},
                 {"c", row.c},
                 {"truth", row.truth},
                 {"mean", row.mean},
                 {"median", row.median},
                 {"bias", row.bias},
                 {"pct_bias", row.pct_bias},
                 {"rmse", row.rmse},
                 {"avg_se", row.avg_se},
                 {"coverage", row.coverage},
                 {"replications", row.replications},
                 {"failures", row.failures}});
  j["rows"] = std::move(r);
  return j;
}

json to_json(const GateauxReport& r) {
  json forms = json::array();
  for (EifForm f : r.forms) forms.push_back(to_string(f));
  return {{"schema_version", kSchemaVersion},
          {"kind", "gateaux_check"},
          {"toy", r.toy},
          {"forms", forms},
          {"comparisons", r.comparisons},
          {"max_error", r.max_error},
          {"worst",
           {{"cell", r.worst.cell},
            {"arm", std::string(arm_code(r.worst.arm))},
            {"time", r.worst.time},
            {"cause", r.worst.cause},
            {"form", to_string(r.worst.form)},
            {"numeric", r.worst.numeric},
            {"closed_form", r.worst.closed_form}}}};
}

void write_report(const FusedDataset& ds, const CurveEstimate& curve, const OverlapDiagnostic& overlap,
                  std::ostream& out) {
  out << "fusioncurve estimate\n\n";
  out << "rows: " << ds.size() << " (historical " << ds.n_historical() << ", bridging " << ds.n_bridging() << ")\n";
  out << "  historical arm 0: " << ds.count(Trial::Historical, Arm::Placebo)
      << ", arm 1: " << ds.count(Trial::Historical, Arm::Approved) << '\n';
  out << "  bridging arm 1: " << ds.count(Trial::Bridging, Arm::Approved)
      << ", arm 1p: " << ds.count(Trial::Bridging, Arm::Investigational) << '\n';
  out << "causes: " << ds.causes() << ", horizon: " << fmt(ds.horizon()) << "\n\n";

  out << "cross-fitting: K = " << curve.folds << ", seed = " << curve.seed << '\n';
  out << "level: " << fmt(curve.level) << ", band multiplier draws: " << curve.band_draws << '\n';
  out << "sensitivity: rho = " << fmt(curve.sensitivity.rho) << ", h_offset = " << fmt(curve.sensitivity.h_offset)
      << "\n\n";

  out << "covariate overlap (bridging rows outside the historical range)\n";
  for (std::size_t j = 0; j < overlap.coordinates.size(); ++j) {
    const auto& c = overlap.coordinates[j];
    out << "  x" << j + 1 << ": historical [" << fmt(c.historical_min) << ", " << fmt(c.historical_max)
        << "], bridging [" << fmt(c.bridging_min) << ", " << fmt(c.bridging_max) << "], outside "
        << fmt(c.outside_fraction) << '\n';
  }
  out << "  outside in any coordinate: " << fmt(overlap.outside_any_fraction) << "\n\n";

  const auto& tc = curve.truncation_counts;
  out << "truncation (floor or cap activations)\n";
  out << "  propensity < " << fmt(curve.truncation.propensity) << ": " << tc.propensity << '\n';
  out << "  censoring survival < " << fmt(curve.truncation.censoring) << ": " << tc.censoring << '\n';
  out << "  density ratio > " << fmt(curve.truncation.density_ratio) << ": " << tc.density_ratio << " of "
      << tc.weights << " weights\n\n";

  out << "band quantiles:";
  for (double q : curve.band_quantile) out << ' ' << fmt(q);
  out << "\n\n";
  out << "arm cause time estimate se ci_lo ci_hi\n";
  for (const auto& p : curve.points)
    out << arm_code(p.arm) << ' ' << p.cause << ' ' << fmt(p.time) << ' ' << fmt(p.estimate) << ' ' << fmt(p.se)
        << ' ' << fmt(p.ci_lo) << ' ' << fmt(p.ci_hi) << '\n';
  if (!curve.warnings.empty()) {
    out << "\nwarnings\n";
    for (const auto& w : curve.warnings) out << "  " << w << '\n';
  }
}

}  // namespace fusioncurve
