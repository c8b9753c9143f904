// Acceptance suite. One line per criterion:
//   ACCEPTANCE <k> PASS|FAIL <name>: <measured values>
// Run with criterion numbers as arguments to select a subset (default: all).
// Exit status is the number of failed criteria.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fusioncurve/eif.hpp"
#include "fusioncurve/estimator.hpp"
#include "fusioncurve/rng.hpp"
#include "fusioncurve/simlab.hpp"
#include "fusioncurve/toy.hpp"

using namespace fusioncurve;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome table1() {
  sim::StudyConfig cfg;
  cfg.replications = 500;
  cfg.seed = 1;
  cfg.t = 5.0;
  cfg.truth_draws = 1'000'000;
  cfg.estimator.spec = sim::correct_spec();
  cfg.estimator.folds = 5;
  const std::vector<sim::Scenario> cells{{1000, 0.0}, {2000, 0.0}, {1000, 0.25}, {2000, 0.25}};
  const auto rows = sim::run_study(cells, cfg);
  Outcome o{true, ""};
  for (const auto& r : rows) {
    const bool ok = std::abs(r.bias) <= 0.012 && r.coverage >= 0.92 && r.coverage <= 0.98;
    o.pass = o.pass && ok;
    o.detail += "(" + std::to_string(r.n_h) + "," + num(r.c, 2) + ") truth " + num(r.truth) + " bias " +
                num(r.bias, 3) + " cov " + num(r.coverage, 3) + " fail " + std::to_string(r.failures) + "; ";
  }
  return o;
}

Outcome identification() {
  sim::DgpConfig cfg{0.0, 50000, 12500, 1, 1};
  const auto ds = sim::generate(cfg);
  const sim::OracleNuisance nu(cfg);
  const double t = 5.0;
  const auto m = plugin_mediation(nu, ds, Arm::Investigational, t);
  const auto out = plugin_outcome(nu, ds, Arm::Investigational, t);
  const auto w = plugin_weighting(nu, ds, Arm::Investigational, t);
  auto z = [](const PluginEstimate& a, const PluginEstimate& b) {
    return std::abs(a.value - b.value) / std::hypot(a.se, b.se);
  };
  const double zmo = z(m, out), zmw = z(m, w), zow = z(out, w);
  return {zmo <= 3.0 && zmw <= 3.0 && zow <= 3.0,
          "mediation " + num(m.value) + " (" + num(m.se, 2) + "), outcome " + num(out.value) + " (" + num(out.se, 2) +
              "), weighting " + num(w.value) + " (" + num(w.se, 2) + "); |z| " + num(zmo, 3) + ", " + num(zmw, 3) +
              ", " + num(zow, 3)};
}

Outcome gateaux() {
  Outcome o{true, ""};
  for (const char* name : {"no_censoring", "censoring"}) {
    const auto toy = DiscreteToyModel::load(fs::path(FUSIONCURVE_TOYS) / (std::string(name) + ".json"));
    const auto r = gateaux_check(toy);
    o.pass = o.pass && r.max_error < 1e-6 && r.comparisons > 0;
    o.detail += std::string(name) + " max error " + num(r.max_error, 3) + " over " + std::to_string(r.comparisons) +
                "; ";
  }
  return o;
}

// Oracle with the censoring survival set to one.
class UnitCensoring final : public Nuisance {
 public:
  explicit UnitCensoring(const Nuisance& inner) : inner_(inner) {}
  int causes() const override { return inner_.causes(); }
  double kappa() const override { return inner_.kappa(); }
  Truncation truncation() const override { return inner_.truncation(); }
  double prob_bridging(std::span<const double> x) const override { return inner_.prob_bridging(x); }
  double prob_historical_approved(std::span<const double> x) const override {
    return inner_.prob_historical_approved(x);
  }
  double prob_arm_bridging(Arm a, std::span<const double> x) const override { return inner_.prob_arm_bridging(a, x); }
  double marker_density(std::span<const double> s, std::span<const double> x, Trial t, Arm a) const override {
    return inner_.marker_density(s, x, t, a);
  }
  MarkerNodes marker_nodes(std::span<const double> x, Arm a) const override { return inner_.marker_nodes(x, a); }
  EventCurve event_curve(std::span<const double> x, std::span<const double> s) const override {
    return inner_.event_curve(x, s);
  }
  double censoring_survival_before(double, std::span<const double>, std::span<const double>) const override {
    return 1.0;
  }

 private:
  const Nuisance& inner_;
};

std::shared_ptr<const Nuisance> full_fit(const FusedDataset& ds) {
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return std::make_shared<FittedNuisance>(ds.records(), all, ds.kappa(), ds.causes(), sim::correct_spec());
}

Outcome reductions() {
  const std::vector<double> times{1.0, 2.5, 5.0};
  // censored with G^C = 1 vs complete, on rows not censored before t
  double d1 = 0.0;
  {
    const auto cfg = sim::standard_config(500, 0.25, 31);
    const auto ds = sim::generate(cfg);
    const sim::OracleNuisance oracle(cfg);
    const UnitCensoring nu(oracle);
    for (double t : times)
      for (const auto& r : ds.records()) {
        if (r.historical() && *r.delta == 0 && *r.time < t) continue;
        for (Arm a : {Arm::Approved, Arm::Investigational})
          d1 = std::max(d1, std::abs(eif_censored_row(nu, r, a, t) - eif_complete_row(nu, r, a, t)));
      }
  }
  // competing with J = 1 vs censored
  double d2 = 0.0;
  {
    const auto ds = sim::generate(sim::standard_config(500, 0.25, 32));
    const auto nu = full_fit(ds);
    for (double t : times)
      for (const auto& r : ds.records())
        for (Arm a : {Arm::Approved, Arm::Investigational})
          d2 = std::max(d2, std::abs(eif_competing_row(*nu, r, a, t, 1) - eif_censored_row(*nu, r, a, t)));
  }
  // cause-specific plug-ins sum to the all-cause plug-in
  double d3 = 0.0;
  {
    auto cfg = sim::standard_config(500, 0.25, 33);
    cfg.causes = 2;
    const auto ds = sim::generate(cfg);
    const auto nu = full_fit(ds);
    for (double t : times)
      for (Arm a : {Arm::Approved, Arm::Investigational}) {
        const auto rep = check_sum_to_allcause(*nu, ds, a, t);
        d3 = std::max({d3, std::abs(rep.plugin_sum - rep.allcause_plugin),
                       std::abs(rep.eif_sum - rep.allcause_eif_mean)});
      }
  }
  return {d1 <= 1e-10 && d2 <= 1e-10 && d3 <= 1e-8,
          "censored vs complete " + num(d1, 3) + ", competing vs censored " + num(d2, 3) + ", cause sum " +
              num(d3, 3)};
}

Outcome robustness() {
  sim::StudyConfig cfg;
  cfg.replications = 300;
  cfg.seed = 1;
  cfg.truth_draws = 1'000'000;
  cfg.estimator.spec = sim::correct_spec();
  const std::vector<Scenario> scen{Scenario::AllCorrect, Scenario::Ma, Scenario::Mb, Scenario::Mc,
                                   Scenario::NoneCorrect};
  const auto rows = sim::misspecification_suite({2000, 0.0}, scen, cfg);
  std::map<Scenario, double> bias;
  Outcome o{true, ""};
  for (const auto& r : rows) {
    bias[r.scenario] = r.bias;
    o.detail += to_string(r.scenario) + " " + num(r.bias, 3) + " (mc se " + num(r.mc_se, 2) + "); ";
  }
  const double none = std::abs(bias[Scenario::NoneCorrect]);
  for (Scenario s : {Scenario::Ma, Scenario::Mb, Scenario::Mc})
    o.pass = o.pass && std::abs(bias[s]) < 0.015 && none > std::abs(bias[s]);
  o.pass = o.pass && none > 0.03;
  return o;
}

Outcome band() {
  sim::StudyConfig cfg;
  cfg.replications = 500;
  cfg.seed = 1;
  cfg.truth_draws = 1'000'000;
  cfg.estimator.spec = sim::correct_spec();
  cfg.estimator.band_draws = 1000;
  cfg.estimator.level = 0.95;
  const std::vector<double> grid{1, 2, 3, 4, 5};
  const auto r = sim::band_study({2000, 0.0}, grid, cfg);
  return {r.coverage >= 0.93 && r.band_inside_ci_violations == 0 && r.failures == 0,
          "simultaneous coverage " + num(r.coverage, 3) + ", pointwise " + num(r.pointwise_coverage, 3) +
              ", band-inside-CI violations " + std::to_string(r.band_inside_ci_violations) + ", failures " +
              std::to_string(r.failures)};
}

Outcome monotone() {
  const std::vector<double> hand{0.1, 0.3, 0.2};
  const auto fit = isotonic(hand);
  bool ok = fit == std::vector<double>{0.1, 0.25, 0.25};
  Engine eng(derive_seed(7, {1}));
  std::normal_distribution<double> z;
  std::size_t checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> y(1 + rep % 30);
    for (auto& v : y) v = z(eng);
    const auto f = isotonic(y);
    ok = ok && std::is_sorted(f.begin(), f.end()) && isotonic(f) == f;
    ++checked;
  }
  return {ok, "hand case (" + num(fit[0]) + ", " + num(fit[1]) + ", " + num(fit[2]) + "), " + std::to_string(checked) +
                  " random inputs nondecreasing and idempotent"};
}

Outcome relve() {
  EstimatorConfig e;
  e.spec = sim::correct_spec();
  e.arms = {Arm::Approved, Arm::Investigational};
  e.grid = {1, 2, 3, 4, 5};
  e.band_draws = 0;
  e.seed = 1;
  const auto ds = sim::generate(sim::standard_config(2000, 0.0, 1));
  const auto res = estimate_curve(ds, e);
  const auto rv = relative_ve(res.eif, 0, 0.95);
  const auto boot = bootstrap_relve(ds, e, 300, 2);
  const std::size_t last = e.grid.size() - 1;
  const double delta = *rv.points[last].se_log_rr;
  const double bs = boot.se_log_rr[last];
  const double ratio = delta / bs;
  // relVE scale: |d relVE| = ratio * |d log ratio|
  const double ratio_now = rv.points[last].r_investigational / rv.points[last].r_approved;
  const double relve_ratio = ratio_now * delta / boot.se_relve[last];

  bool sign = true;
  std::size_t runs = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto d = sim::generate(sim::standard_config(1000, 0.25, 100 + s));
    const auto rr = relative_ve(estimate_curve(d, e).eif, 0, 0.95);
    for (const auto& p : rr.points)
      if (p.defined) sign = sign && ((p.relve > 0.0) == (p.r_investigational < p.r_approved));
    ++runs;
  }
  for (const auto& p : rv.points) sign = sign && ((p.relve > 0.0) == (p.r_investigational < p.r_approved));
  return {std::abs(ratio - 1.0) <= 0.15 && sign,
          "t=5: delta-method se(log RR) " + num(delta) + ", bootstrap " + num(bs) + " (ratio " + num(ratio, 3) +
              "); relVE scale ratio " + num(relve_ratio, 3) + "; sign property over " + std::to_string(runs + 1) +
              " runs " + (sign ? "holds" : "violated")};
}

Outcome ncde() {
  NcdeConfig cfg;
  cfg.t_star = 4.0;
  cfg.alpha = 0.05;
  cfg.bootstrap = 200;
  cfg.estimator.spec = sim::correct_spec();
  cfg.estimator.folds = 2;
  sim::NcdeDgp null_dgp{2000, 0.0, 0.0, 1};
  const auto n = sim::ncde_study(null_dgp, 300, cfg, 1, 0);
  sim::NcdeDgp alt_dgp{2000, 0.0, std::log(2.0), 1};
  const auto p = sim::ncde_study(alt_dgp, 100, cfg, 2, 0);
  const double bound = cfg.alpha + 3.0 * std::sqrt(cfg.alpha * (1.0 - cfg.alpha) / 300.0);
  return {n.rejection_rate <= bound && p.rejection_rate >= 0.8,
          "type I " + num(n.rejection_rate, 3) + " (bound " + num(bound, 3) + ", " + std::to_string(n.replications) +
              " runs, " + std::to_string(n.failures) + " failed); power " + num(p.rejection_rate, 3) + " (" +
              std::to_string(p.replications) + " runs, hazard ratio 2 in arm 1p)"};
}

// ---------------------------------------------------------------------------

int sh(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const std::string cli = FUSIONCURVE_CLI;
  const std::string toys = FUSIONCURVE_TOYS;
  const fs::path root = fs::temp_directory_path() / "fusioncurve_determinism";
  fs::remove_all(root);
  struct Cmd {
    std::string name, args;
  };
  const std::vector<Cmd> cmds{
      {"estimate", "estimate --config " + toys + "/sample.ini"},
      {"competing", "estimate --config " + toys + "/competing.ini"},
      {"relve", "relve --config " + toys + "/sample.ini --bootstrap 30"},
      {"ncde", "ncde-test --config " + toys + "/ncde.ini"},
      {"simulate", "simulate --config " + toys + "/simulate.ini"},
      {"gateaux", "gateaux-check " + toys + "/censoring.json " + toys + "/competing.json"},
  };
  bool ok = true;
  std::size_t files = 0;
  std::string bad;
  for (const auto& c : cmds) {
    std::vector<fs::path> dirs;
    for (const char* run : {"t1a", "t1b", "t3"}) {
      const fs::path dir = root / c.name / run;
      const std::string threads = std::string(run) == "t3" ? "3" : "1";
      const std::string extra = c.name == "gateaux" ? "" : " --threads " + threads;
      if (sh(cli + " " + c.args + extra + " --out " + dir.string()) != 0) {
        ok = false;
        bad += c.name + " exit; ";
      }
      dirs.push_back(dir);
    }
    if (!fs::exists(dirs[0])) {
      ok = false;
      bad += c.name + " no output; ";
      continue;
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      const std::string ref = slurp(entry.path());
      ++files;
      for (std::size_t k = 1; k < dirs.size(); ++k)
        if (slurp(dirs[k] / name) != ref) {
          ok = false;
          bad += c.name + "/" + name.string() + "; ";
        }
    }
  }
  return {ok && files > 0, std::to_string(files) + " output files compared across reruns and --threads 1/3" +
                               (bad.empty() ? "" : "; mismatches: " + bad)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"table1 reproduction", table1},
      {"identification-form equivalence", identification},
      {"gateaux check", gateaux},
      {"reductions", reductions},
      {"multiple robustness", robustness},
      {"uniform band", band},
      {"monotone correction", monotone},
      {"relative VE", relve},
      {"NCDE calibration", ncde},
      {"determinism", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int k = 1; k <= 10; ++k) selected.push_back(k);

  int failed = 0;
  for (int k : selected) {
    if (k < 1 || k > 10) {
      std::cerr << "unknown criterion " << k << '\n';
      return 100;
    }
    const auto& [name, fn] = criteria[k - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "ACCEPTANCE " << k << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << name << ": " << o.detail << " ["
              << num(secs, 3) << " s]" << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed;
}
