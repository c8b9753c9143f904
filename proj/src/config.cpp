#include "fusioncurve/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fusioncurve/error.hpp"

namespace fusioncurve {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"data", {"historical", "bridging", "outcome", "covariates", "arm", "markers", "time", "event", "horizon", "trim"}},
      {"estimate", {"folds", "seed", "grid", "arms", "causes", "level", "band_draws", "form"}},
      {"models",
       {"gamma", "historical_approved", "arm", "marker_historical", "marker_bridging", "event", "censoring",
        "quadrature_nodes", "mc_draws", "mc_seed"}},
      {"truncation", {"propensity", "censoring", "density_ratio"}},
      {"sensitivity", {"rho", "h_offset"}},
      {"relve", {"bootstrap"}},
      {"ncde", {"t_star", "alpha", "bootstrap", "min_events"}},
      {"simulate", {"scenarios", "replications", "t", "truth_draws", "seed"}},
      {"output", {"dir"}},
  };
  return keys;
}

bool is_event_key(const std::string& k) {
  if (k.size() <= 5 || k.rfind("event", 0) != 0) return false;
  return std::all_of(k.begin() + 5, k.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::string trimmed(std::string s) {
  boost::algorithm::trim(s);
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  const std::string t = trimmed(text);
  if (t.empty()) return parts;
  boost::algorithm::split(parts, t, boost::is_any_of(","));
  for (auto& p : parts) p = trimmed(p);
  return parts;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trimmed(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw Error(ErrorCode::InvalidArgument, key + ": '" + text + "' is not a number");
  return v;
}

long long to_int(const std::string& key, const std::string& text) {
  const std::string t = trimmed(text);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw Error(ErrorCode::InvalidArgument, key + ": '" + text + "' is not an integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::to_lower_copy(trimmed(text));
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw Error(ErrorCode::InvalidArgument, key + ": '" + text + "' is not a boolean");
}

FeatureSpec to_spec(const std::string& key, const std::string& text) {
  try {
    return FeatureSpec::parse(trimmed(text));
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidArgument, key + ": " + e.what());
  }
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& p : split_list(text)) out.push_back(to_double("list", p));
  return out;
}

std::vector<Arm> parse_arm_list(const std::string& text) {
  std::vector<Arm> out;
  for (const auto& p : split_list(text)) {
    const Arm a = parse_arm_code(p);
    if (a == Arm::Placebo) throw Error(ErrorCode::InvalidArgument, "arm 0 is not an estimation target");
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty arm list");
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<sim::Scenario> parse_scenarios(const std::string& text) {
  std::vector<sim::Scenario> out;
  for (const auto& p : split_list(text)) {
    const auto colon = p.find(':');
    if (colon == std::string::npos)
      throw Error(ErrorCode::InvalidArgument, "simulate.scenarios: '" + p + "' is not of the form n_h:c");
    const long long n = to_int("simulate.scenarios", p.substr(0, colon));
    const double c = to_double("simulate.scenarios", p.substr(colon + 1));
    if (n < 8 || c < 0.0) throw Error(ErrorCode::InvalidArgument, "simulate.scenarios: invalid scenario '" + p + "'");
    out.push_back({static_cast<std::size_t>(n), c});
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "simulate.scenarios is empty");
  return out;
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end() || body.data().size() > 0)
      throw Error(ErrorCode::InvalidArgument, "config: unknown section or top-level key '" + section + "'");
    for (const auto& [key, value] : body)
      if (!it->second.contains(key) && !(section == "models" && is_event_key(key)))
        throw Error(ErrorCode::InvalidArgument, "config: unknown key '" + section + "." + key + "'");
  }
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return *v;
    return std::nullopt;
  };
  auto path_of = [&](const std::string& v) {
    std::filesystem::path p(trimmed(v));
    return p.is_relative() && !base.empty() ? base / p : p;
  };

  RunConfig cfg;
  if (auto v = get("data.historical")) cfg.historical = path_of(*v);
  if (auto v = get("data.bridging")) cfg.bridging = path_of(*v);
  if (auto v = get("data.outcome")) cfg.outcome = path_of(*v);
  if (auto v = get("data.covariates")) cfg.schema.covariates = split_list(*v);
  if (auto v = get("data.arm")) cfg.schema.arm = trimmed(*v);
  if (auto v = get("data.markers")) cfg.schema.markers = split_list(*v);
  if (auto v = get("data.time")) cfg.schema.time = trimmed(*v);
  if (auto v = get("data.event")) cfg.schema.event = trimmed(*v);
  if (auto v = get("data.horizon")) cfg.horizon = to_double("data.horizon", *v);
  if (auto v = get("data.trim")) cfg.trim = to_bool("data.trim", *v);
  if (cfg.schema.markers.empty()) throw Error(ErrorCode::InvalidArgument, "data.markers is empty");

  EstimatorConfig& e = cfg.estimator;
  if (auto v = get("estimate.folds")) e.folds = static_cast<int>(to_int("estimate.folds", *v));
  if (auto v = get("estimate.seed")) e.seed = static_cast<std::uint64_t>(to_int("estimate.seed", *v));
  if (auto v = get("estimate.grid")) {
    e.grid = parse_number_list(*v);
    cfg.grid_given = !e.grid.empty();
  }
  if (auto v = get("estimate.arms")) e.arms = parse_arm_list(*v);
  if (auto v = get("estimate.causes")) {
    e.causes.clear();
    for (const auto& p : split_list(*v)) e.causes.push_back(static_cast<int>(to_int("estimate.causes", p)));
  }
  if (auto v = get("estimate.level")) e.level = to_double("estimate.level", *v);
  if (auto v = get("estimate.band_draws"))
    e.band_draws = static_cast<std::size_t>(to_int("estimate.band_draws", *v));
  if (auto v = get("estimate.form")) {
    const std::string f = trimmed(*v);
    if (f == "complete") e.form = EifForm::Complete;
    else if (f == "censored") e.form = EifForm::Censored;
    else if (f == "competing") e.form = EifForm::Competing;
    else throw Error(ErrorCode::InvalidArgument, "estimate.form: unknown form '" + f + "'");
  }
  if (e.folds < 2) throw Error(ErrorCode::InvalidArgument, "estimate.folds must be at least 2");
  if (!(e.level > 0.0 && e.level < 1.0)) throw Error(ErrorCode::InvalidArgument, "estimate.level must lie in (0, 1)");

  // Feature specs: linear defaults for user data, the generating-process specs for simulation.
  NuisanceSpec spec = cfg.schema.covariates.empty() ? sim::correct_spec()
                                                    : NuisanceSpec::defaults(cfg.schema.covariates.size());
  NuisanceSpec sim_spec = sim::correct_spec();
  auto apply = [&](auto&& fn) {
    fn(spec);
    fn(sim_spec);
  };
  const std::pair<const char*, FeatureSpec NuisanceSpec::*> simple[] = {
      {"gamma", &NuisanceSpec::gamma_propensity},
      {"historical_approved", &NuisanceSpec::historical_approved_propensity},
      {"arm", &NuisanceSpec::arm_propensity},
      {"marker_historical", &NuisanceSpec::marker_historical},
      {"marker_bridging", &NuisanceSpec::marker_bridging},
      {"censoring", &NuisanceSpec::censoring},
  };
  for (const auto& [key, member] : simple)
    if (auto v = get(std::string("models.") + key)) {
      const FeatureSpec f = to_spec(std::string("models.") + key, *v);
      apply([&](NuisanceSpec& s) { s.*member = f; });
    }
  if (auto v = get("models.event")) {
    const FeatureSpec f = to_spec("models.event", *v);
    apply([&](NuisanceSpec& s) { s.event = {f}; });
  }
  if (auto models = tree.get_child_optional("models")) {
    std::map<int, FeatureSpec> per_cause;
    for (const auto& [key, value] : *models)
      if (is_event_key(key)) per_cause[std::stoi(key.substr(5))] = to_spec("models." + key, value.data());
    if (!per_cause.empty()) {
      const int J = per_cause.rbegin()->first;
      if (static_cast<int>(per_cause.size()) != J || per_cause.begin()->first != 1)
        throw Error(ErrorCode::InvalidArgument, "models.event<k> must be given for every k = 1..J");
      std::vector<FeatureSpec> ev;
      for (auto& [k, f] : per_cause) ev.push_back(f);
      apply([&](NuisanceSpec& s) { s.event = ev; });
    }
  }
  if (auto v = get("models.quadrature_nodes")) {
    const auto n = static_cast<std::size_t>(to_int("models.quadrature_nodes", *v));
    apply([&](NuisanceSpec& s) { s.quadrature_nodes = n; });
  }
  if (auto v = get("models.mc_draws")) {
    const auto n = static_cast<std::size_t>(to_int("models.mc_draws", *v));
    apply([&](NuisanceSpec& s) { s.mc_draws = n; });
  }
  if (auto v = get("models.mc_seed")) {
    const auto n = static_cast<std::uint64_t>(to_int("models.mc_seed", *v));
    apply([&](NuisanceSpec& s) { s.mc_seed = n; });
  }
  Truncation tr;
  if (auto v = get("truncation.propensity")) tr.propensity = to_double("truncation.propensity", *v);
  if (auto v = get("truncation.censoring")) tr.censoring = to_double("truncation.censoring", *v);
  if (auto v = get("truncation.density_ratio")) tr.density_ratio = to_double("truncation.density_ratio", *v);
  if (tr.propensity < 0.0 || tr.propensity >= 0.5 || tr.censoring < 0.0 || tr.censoring >= 1.0 ||
      !(tr.density_ratio > 0.0))
    throw Error(ErrorCode::InvalidArgument, "truncation levels out of range");
  apply([&](NuisanceSpec& s) { s.truncation = tr; });
  e.spec = spec;

  if (auto v = get("sensitivity.rho")) e.sensitivity.rho = to_double("sensitivity.rho", *v);
  if (auto v = get("sensitivity.h_offset")) e.sensitivity.h_offset = to_double("sensitivity.h_offset", *v);
  if (!(e.sensitivity.rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "sensitivity.rho must be positive");

  if (auto v = get("relve.bootstrap")) cfg.relve_bootstrap = static_cast<std::size_t>(to_int("relve.bootstrap", *v));

  if (auto v = get("ncde.t_star")) {
    cfg.ncde.t_star = to_double("ncde.t_star", *v);
    cfg.t_star_given = true;
  }
  if (auto v = get("ncde.alpha")) cfg.ncde.alpha = to_double("ncde.alpha", *v);
  if (auto v = get("ncde.bootstrap")) cfg.ncde.bootstrap = static_cast<std::size_t>(to_int("ncde.bootstrap", *v));
  if (auto v = get("ncde.min_events")) cfg.ncde.min_events = static_cast<int>(to_int("ncde.min_events", *v));

  if (auto v = get("simulate.scenarios")) cfg.scenarios = parse_scenarios(*v);
  if (auto v = get("simulate.replications"))
    cfg.study.replications = static_cast<std::size_t>(to_int("simulate.replications", *v));
  if (auto v = get("simulate.t")) cfg.study.t = to_double("simulate.t", *v);
  if (auto v = get("simulate.truth_draws"))
    cfg.study.truth_draws = static_cast<std::size_t>(to_int("simulate.truth_draws", *v));
  if (auto v = get("simulate.seed")) cfg.study.seed = static_cast<std::uint64_t>(to_int("simulate.seed", *v));
  if (cfg.study.replications < 1) throw Error(ErrorCode::InvalidArgument, "simulate.replications must be >= 1");
  cfg.study.estimator = e;
  cfg.study.estimator.spec = sim_spec;

  if (auto v = get("output.dir")) cfg.out = path_of(*v);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace fusioncurve
