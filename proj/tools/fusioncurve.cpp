// fusioncurve command-line front end.
//
// exit codes: 0 ok, 1 check failed, 2 usage or config error, 3 runtime error

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "fusioncurve/config.hpp"
#include "fusioncurve/error.hpp"
#include "fusioncurve/estimator.hpp"
#include "fusioncurve/report.hpp"
#include "fusioncurve/rng.hpp"
#include "fusioncurve/simlab.hpp"
#include "fusioncurve/toy.hpp"

namespace fs = std::filesystem;
using namespace fusioncurve;

namespace {

constexpr int kOk = 0, kCheckFailed = 1, kUsage = 2, kRuntime = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<std::string> grid;
  std::optional<std::string> arm;
  std::optional<std::string> cause;
  std::optional<double> rho;
  std::optional<double> h_offset;
  std::optional<double> level;
  std::optional<std::size_t> bootstrap;
  std::optional<double> t_star;
};

int env_threads() {
  if (const char* v = std::getenv("FUSIONCURVE_THREADS")) {
    try {
      return std::stoi(v);
    } catch (...) {
      throw UsageError("FUSIONCURVE_THREADS is not an integer");
    }
  }
  return 0;
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? parse_config("") : load_config(o.config);
  EstimatorConfig& e = cfg.estimator;
  if (o.seed) {
    e.seed = *o.seed;
    cfg.study.seed = *o.seed;
  }
  cfg.threads = o.threads ? *o.threads : env_threads();
  if (cfg.threads < 0) throw UsageError("--threads must be >= 0");
  e.threads = cfg.threads;
  if (o.out) cfg.out = *o.out;
  if (o.grid) {
    e.grid = parse_number_list(*o.grid);
    cfg.grid_given = !e.grid.empty();
  }
  if (o.arm) e.arms = parse_arm_list(*o.arm);
  if (o.cause) {
    e.causes.clear();
    for (double c : parse_number_list(*o.cause)) e.causes.push_back(static_cast<int>(c));
  }
  if (o.rho) e.sensitivity.rho = *o.rho;
  if (o.h_offset) e.sensitivity.h_offset = *o.h_offset;
  if (o.level) e.level = *o.level;
  if (!(e.sensitivity.rho > 0.0)) throw UsageError("--rho must be positive");
  if (!(e.level > 0.0 && e.level < 1.0)) throw UsageError("--level must lie in (0, 1)");
  if (o.bootstrap) {
    cfg.relve_bootstrap = *o.bootstrap;
    cfg.ncde.bootstrap = *o.bootstrap;
  }
  if (o.t_star) {
    cfg.ncde.t_star = *o.t_star;
    cfg.t_star_given = true;
  }
  // simulation studies share the estimator settings except the feature specs
  const NuisanceSpec sim_spec = cfg.study.estimator.spec;
  cfg.study.estimator = e;
  cfg.study.estimator.spec = sim_spec;
  cfg.study.threads = cfg.threads;
  return cfg;
}

void require(const fs::path& p, const char* key) {
  if (p.empty()) throw UsageError(std::string("config: ") + key + " is required for this command");
}

std::ofstream open_out(const fs::path& dir, const char* name) {
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / name).string());
  return out;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir.string());
}

FusedDataset load_data(const RunConfig& cfg) {
  require(cfg.historical, "data.historical");
  require(cfg.bridging, "data.bridging");
  if (cfg.schema.covariates.empty()) throw UsageError("config: data.covariates is required");
  FusedDataset ds = cfg.horizon ? load_fused_csv(cfg.historical, cfg.bridging, cfg.schema, *cfg.horizon)
                                : load_fused_csv(cfg.historical, cfg.bridging, cfg.schema);
  if (cfg.trim) ds = trim_to_overlap(ds).data;
  return ds;
}

// Errors while reading config and data are usage errors; the rest are runtime errors.
template <class Setup, class Run>
int staged(Setup setup, Run run) {
  std::optional<decltype(setup())> state;
  try {
    state.emplace(setup());
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  try {
    return run(*state);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

struct Loaded {
  RunConfig cfg;
  std::optional<FusedDataset> ds;
};

int cmd_estimate(const Overrides& o) {
  return staged(
      [&] {
        Loaded l{resolve(o), std::nullopt};
        l.ds.emplace(load_data(l.cfg));
        return l;
      },
      [&](Loaded& l) {
        const auto res = estimate_curve(*l.ds, l.cfg.estimator);
        make_dir(l.cfg.out);
        auto csv = open_out(l.cfg.out, "curve.csv");
        write_curve_csv(res.curve, csv);
        auto js = open_out(l.cfg.out, "curve.json");
        js << to_json(res.curve).dump(2) << '\n';
        auto eif = open_out(l.cfg.out, "eif.csv");
        write_eif_csv(res.eif, eif);
        auto rep = open_out(l.cfg.out, "report.txt");
        write_report(*l.ds, res.curve, overlap_report(*l.ds), rep);
        for (const auto& w : res.curve.warnings) std::cerr << "warning: " << w << '\n';
        std::cout << "wrote " << res.curve.points.size() << " curve rows to " << l.cfg.out.string() << '\n';
        return kOk;
      });
}

int cmd_relve(const Overrides& o) {
  return staged(
      [&] {
        Loaded l{resolve(o), std::nullopt};
        l.ds.emplace(load_data(l.cfg));
        l.cfg.estimator.arms = {Arm::Approved, Arm::Investigational};
        return l;
      },
      [&](Loaded& l) {
        EstimatorConfig e = l.cfg.estimator;
        if (e.grid.empty()) e.grid = default_grid(*l.ds);
        const auto res = estimate_curve(*l.ds, e);
        std::optional<BootstrapSe> boot;
        if (l.cfg.relve_bootstrap > 0) {
          EstimatorConfig b = e;
          b.causes = {e.causes.front()};
          boot = bootstrap_relve(*l.ds, b, l.cfg.relve_bootstrap, derive_seed(e.seed, {0xB007}));
        }
        make_dir(l.cfg.out);
        auto csv = open_out(l.cfg.out, "relve.csv");
        nlohmann::json all = nlohmann::json::array();
        for (std::size_t c = 0; c < e.causes.size(); ++c) {
          const auto rv = relative_ve(res.eif, c, e.level);
          write_relve_csv(rv, csv);
          all.push_back(to_json(rv, c == 0 && boot ? &*boot : nullptr));
        }
        auto js = open_out(l.cfg.out, "relve.json");
        js << nlohmann::json{{"schema_version", kSchemaVersion}, {"kind", "relve_set"}, {"results", all}}.dump(2)
           << '\n';
        auto curve = open_out(l.cfg.out, "curve.csv");
        write_curve_csv(res.curve, curve);
        std::cout << "wrote relative VE for " << e.causes.size() << " cause(s) to " << l.cfg.out.string() << '\n';
        return kOk;
      });
}

struct NcdeLoaded {
  RunConfig cfg;
  std::vector<SubjectRecord> rows;
  double horizon = 0.0;
};

int cmd_ncde(const Overrides& o) {
  return staged(
      [&] {
        NcdeLoaded l{resolve(o), {}, 0.0};
        require(l.cfg.outcome, "data.outcome");
        if (l.cfg.schema.covariates.empty()) throw UsageError("config: data.covariates is required");
        if (!l.cfg.t_star_given) throw UsageError("config: ncde.t_star (or --t-star) is required");
        const int J = static_cast<int>(l.cfg.schema.markers.size());
        l.rows = load_outcome_csv(l.cfg.outcome, l.cfg.schema, J);
        double max_time = 0.0;
        for (const auto& r : l.rows) max_time = std::max(max_time, *r.time);
        l.horizon = l.cfg.horizon.value_or(max_time);
        if (l.cfg.ncde.t_star > l.horizon || !(l.cfg.ncde.t_star > 0.0))
          throw UsageError("ncde.t_star = " + std::to_string(l.cfg.ncde.t_star) + " lies outside (0, H = " +
                           std::to_string(l.horizon) + "]");
        if (l.cfg.ncde.bootstrap < 200) throw UsageError("ncde.bootstrap must be at least 200");
        l.cfg.ncde.estimator = l.cfg.estimator;
        return l;
      },
      [&](NcdeLoaded& l) {
        const auto r = ncde_test(l.rows, static_cast<int>(l.cfg.schema.markers.size()), l.horizon, l.cfg.ncde);
        make_dir(l.cfg.out);
        auto js = open_out(l.cfg.out, "ncde.json");
        js << to_json(r).dump(2) << '\n';
        std::cout << "difference " << r.difference << " CI [" << r.ci_lo << ", " << r.ci_hi << "] reject "
                  << (r.reject ? "yes" : "no") << '\n';
        return kOk;
      });
}

int cmd_simulate(const Overrides& o) {
  return staged([&] { return resolve(o); },
                [&](RunConfig& cfg) {
                  const auto rows = sim::run_study(cfg.scenarios, cfg.study);
                  make_dir(cfg.out);
                  auto csv = open_out(cfg.out, "table1.csv");
                  write_table1_csv(rows, csv);
                  auto js = open_out(cfg.out, "table1.json");
                  js << table1_json(rows).dump(2) << '\n';
                  int code = kOk;
                  for (const auto& r : rows) {
                    std::cout << "n_h=" << r.n_h << " c=" << r.c << " mean=" << r.mean << " bias=" << r.bias
                              << " coverage=" << r.coverage << " failures=" << r.failures << '\n';
                    if (10 * r.failures > cfg.study.replications) {
                      std::cerr << "error: more than 10% of replications failed for n_h=" << r.n_h
                                << " c=" << r.c << '\n';
                      code = kRuntime;
                    }
                  }
                  return code;
                });
}

int cmd_gateaux(const std::vector<std::string>& toys, const std::optional<std::string>& out) {
  return staged(
      [&] {
        std::vector<DiscreteToyModel> models;
        for (const auto& t : toys) models.push_back(DiscreteToyModel::load(t));
        return models;
      },
      [&](std::vector<DiscreteToyModel>& models) {
        int code = kOk;
        nlohmann::json all = nlohmann::json::array();
        for (const auto& m : models) {
          const auto r = gateaux_check(m);
          const bool ok = r.max_error < 1e-6;
          std::cout << r.toy << ": max error " << r.max_error << " over " << r.comparisons << " comparisons "
                    << (ok ? "ok" : "FAILED") << '\n';
          if (!ok) code = kCheckFailed;
          all.push_back(to_json(r));
        }
        if (out) {
          make_dir(*out);
          auto js = open_out(*out, "gateaux.json");
          js << nlohmann::json{{"schema_version", kSchemaVersion}, {"kind", "gateaux_set"}, {"results", all}}.dump(2)
             << '\n';
        }
        return code;
      });
}

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "INI run configuration");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--threads", o.threads, "worker cap (default: FUSIONCURVE_THREADS or all cores)");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--grid", o.grid, "comma-separated time grid");
  sub->add_option("--arm", o.arm, "comma-separated arms (1, 1p)");
  sub->add_option("--cause", o.cause, "comma-separated causes");
  sub->add_option("--rho", o.rho, "relative transmissibility factor");
  sub->add_option("--h-offset", o.h_offset, "logit-scale direct-effect offset");
  sub->add_option("--level", o.level, "confidence level");
  sub->add_option("--bootstrap", o.bootstrap, "bootstrap resamples");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fusioncurve: counterfactual incidence curves from a historical trial and an immunobridging study"};
  app.require_subcommand(1);
  Overrides o;

  auto* est = app.add_subcommand("estimate", "cross-fitted incidence curves with CIs and uniform bands");
  add_common(est, o);
  auto* rv = app.add_subcommand("relve", "relative vaccine efficacy of arm 1p against arm 1");
  add_common(rv, o);
  auto* nc = app.add_subcommand("ncde-test", "test of no controlled direct effects on two-arm outcome data");
  add_common(nc, o);
  nc->add_option("--t-star", o.t_star, "comparison time");
  auto* sm = app.add_subcommand("simulate", "replication study over (n_h, c) scenarios");
  add_common(sm, o);
  std::vector<std::string> toys;
  std::optional<std::string> gout;
  auto* gc = app.add_subcommand("gateaux-check", "point-mass derivative check of the influence functions");
  gc->add_option("toys", toys, "toy model JSON files")->required();
  gc->add_option("--out", gout, "directory for gateaux.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (est->parsed()) return cmd_estimate(o);
  if (rv->parsed()) return cmd_relve(o);
  if (nc->parsed()) return cmd_ncde(o);
  if (sm->parsed()) return cmd_simulate(o);
  if (gc->parsed()) return cmd_gateaux(toys, gout);
  return kUsage;
}
