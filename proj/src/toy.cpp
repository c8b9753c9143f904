#include "fusioncurve/toy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "fusioncurve/error.hpp"
#include "json.hpp"

namespace fusioncurve {

using nlohmann::json;

std::string to_string(EifForm form) {
  switch (form) {
    case EifForm::Complete: return "complete";
    case EifForm::Censored: return "censored";
    case EifForm::Competing: return "competing";
  }
  return "?";
}

namespace {

std::vector<double> as_vector(const json& j) {
  if (j.is_number()) return {j.get<double>()};
  return j.get<std::vector<double>>();
}

void require_positive(double p, const std::string& what) {
  if (!(p > 0.0)) throw Error(ErrorCode::PositivityViolated, what + " has zero probability");
  if (p > 1.0) throw Error(ErrorCode::BadValue, what + " exceeds one");
}

const json& member(const json& j, const std::string& key) {
  if (!j.contains(key)) throw Error(ErrorCode::BadValue, "toy model is missing '" + key + "'");
  return j.at(key);
}

}  // namespace

DiscreteToyModel DiscreteToyModel::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadValue, std::string("toy model is not valid JSON: ") + e.what());
  }
  DiscreteToyModel toy;
  try {
    toy.name_ = j.value("name", "toy");
    toy.causes_ = j.value("causes", 1);
    const double kappa = member(j, "kappa").get<double>();
    require_positive(kappa, "kappa");
    require_positive(1.0 - kappa, "1 - kappa");
    for (const auto& x : member(j, "x_values")) toy.x_values_.push_back(as_vector(x));
    for (const auto& s : member(j, "s_values")) toy.s_values_.push_back(as_vector(s));
    toy.times_ = member(j, "t_values").get<std::vector<double>>();
    for (std::size_t i = 1; i < toy.times_.size(); ++i)
      if (!(toy.times_[i] > toy.times_[i - 1])) throw Error(ErrorCode::BadValue, "t_values must increase");
    const std::size_t nx = toy.x_values_.size(), ns = toy.s_values_.size(), nt = toy.times_.size();
    const std::size_t J = static_cast<std::size_t>(toy.causes_);
    for (const auto& s : toy.s_values_)
      if (s.size() != J) throw Error(ErrorCode::BadValue, "marker values must have one coordinate per cause");

    auto probs_over = [](const json& v, std::size_t n, const std::string& what) {
      auto p = v.get<std::vector<double>>();
      if (p.size() != n) throw Error(ErrorCode::BadValue, what + " has the wrong length");
      double total = 0.0;
      for (double q : p) total += q;
      if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::BadValue, what + " does not sum to one");
      return p;
    };

    for (int g = 0; g < 2; ++g) {
      const Trial trial = g == 0 ? Trial::Historical : Trial::Bridging;
      const std::string tname = g == 0 ? "historical" : "bridging";
      const json& tj = member(j, tname);
      const double pg = g == 0 ? 1.0 - kappa : kappa;
      const auto px = probs_over(member(tj, "p_x"), nx, tname + ".p_x");
      std::vector<Arm> arms;
      for (const auto& code : member(tj, "arms")) {
        const Arm a = parse_arm_code(code.get<std::string>());
        if (!arm_allowed(a, trial)) throw Error(ErrorCode::BadArmCode, "arm " + code.get<std::string>() + " in " + tname);
        arms.push_back(a);
      }
      (g == 0 ? toy.historical_arms_ : toy.bridging_arms_) = arms;
      const json& parm = member(tj, "p_arm");
      for (std::size_t xi = 0; xi < nx; ++xi) {
        require_positive(px[xi], tname + ".p_x[" + std::to_string(xi) + "]");
        const auto pa = probs_over(parm.at(xi), arms.size(), tname + ".p_arm");
        for (std::size_t ai = 0; ai < arms.size(); ++ai) {
          const Arm a = arms[ai];
          const std::string code(arm_code(a));
          require_positive(pa[ai], tname + ".p_arm[" + std::to_string(xi) + "][" + code + "]");
          const auto ps = probs_over(member(tj, "p_s").at(code).at(xi), ns, tname + ".p_s");
          for (std::size_t si = 0; si < ns; ++si) {
            require_positive(ps[si], tname + ".p_s[" + code + "][" + std::to_string(xi) + "][" + std::to_string(si) + "]");
            const double base = pg * px[xi] * pa[ai] * ps[si];
            SubjectRecord rec;
            rec.x = toy.x_values_[xi];
            rec.arm = a;
            rec.trial = trial;
            rec.s = toy.s_values_[si];
            if (trial == Trial::Bridging) {
              toy.cells_.push_back({rec, base});
              toy.coords_.push_back({trial, xi, a, si, 0, 0});
              continue;
            }
            const auto ev = member(tj, "events").at(code).at(xi).at(si).get<std::vector<double>>();
            if (ev.size() != nt * J) throw Error(ErrorCode::BadValue, "events pmf must have |t| * causes entries");
            std::vector<double> cens(nt, 0.0);
            if (tj.contains("censoring")) {
              cens = tj.at("censoring").at(code).at(xi).at(si).get<std::vector<double>>();
              if (cens.size() != nt) throw Error(ErrorCode::BadValue, "censoring pmf must have |t| entries");
            }
            double ev_total = 0.0, cens_total = 0.0;
            for (double q : ev) ev_total += q;
            for (double q : cens) cens_total += q;
            if (ev_total > 1.0 + 1e-12 || cens_total > 1.0 + 1e-12)
              throw Error(ErrorCode::BadValue, "event or censoring pmf exceeds one");
            // P(C >= t_i) and P(T > t_i)
            double c_ge = 1.0, t_gt = 1.0;
            for (std::size_t ti = 0; ti < nt; ++ti) {
              double t_at = 0.0;
              for (std::size_t k = 0; k < J; ++k) {
                t_at += ev[ti * J + k];
                const double p = base * ev[ti * J + k] * c_ge;
                if (p > 0.0) {
                  rec.time = toy.times_[ti];
                  rec.delta = static_cast<int>(k + 1);
                  toy.cells_.push_back({rec, p});
                  toy.coords_.push_back({trial, xi, a, si, ti, static_cast<int>(k + 1)});
                }
              }
              t_gt -= t_at;
              const double pc = base * cens[ti] * t_gt;
              if (pc > 0.0) {
                toy.has_censoring_ = true;
                rec.time = toy.times_[ti];
                rec.delta = 0;
                toy.cells_.push_back({rec, pc});
                toy.coords_.push_back({trial, xi, a, si, ti, 0});
              }
              c_ge -= cens[ti];
            }
            const double tail = base * t_gt * c_ge;
            if (tail > 1e-15) {
              rec.time = toy.times_.back() + 1.0;
              rec.delta = 0;
              toy.cells_.push_back({rec, tail});
              toy.coords_.push_back({trial, xi, a, si, nt, 0});
            }
          }
        }
      }
    }
    if (std::find(toy.historical_arms_.begin(), toy.historical_arms_.end(), Arm::Approved) == toy.historical_arms_.end())
      throw Error(ErrorCode::PositivityViolated, "historical trial has no approved arm");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadValue, std::string("toy model: ") + e.what());
  }
  return toy;
}

DiscreteToyModel DiscreteToyModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::vector<double> DiscreteToyModel::base_probabilities() const {
  std::vector<double> p;
  p.reserve(cells_.size());
  for (const auto& c : cells_) p.push_back(c.prob);
  return p;
}

std::size_t DiscreteToyModel::x_index(std::span<const double> x) const {
  for (std::size_t i = 0; i < x_values_.size(); ++i)
    if (std::equal(x.begin(), x.end(), x_values_[i].begin(), x_values_[i].end())) return i;
  throw Error(ErrorCode::InvalidArgument, "covariate value outside the toy support");
}

std::size_t DiscreteToyModel::s_index(std::span<const double> s) const {
  for (std::size_t i = 0; i < s_values_.size(); ++i)
    if (std::equal(s.begin(), s.end(), s_values_[i].begin(), s_values_[i].end())) return i;
  throw Error(ErrorCode::InvalidArgument, "marker value outside the toy support");
}

// ---------------------------------------------------------------------------
// Marginals of a table, indexed densely.

namespace {

struct Tables {
  std::size_t nx = 0, ns = 0, nt = 0, J = 1;
  double total = 0.0;
  double bridging = 0.0;
  std::vector<double> px;                 // [x]
  std::vector<double> pbx;                // Gamma=1, x
  std::vector<double> pbxa;               // Gamma=1, x, arm(3)
  std::vector<double> pbxas;              // Gamma=1, x, arm, s
  std::vector<double> phxa;               // Gamma=0, x, arm
  std::vector<double> phxas;              // Gamma=0, x, arm, s
  std::vector<double> events;             // Gamma=0, A=1, x, s, time(nt+1), delta(J+1)

  std::size_t xa(std::size_t x, Arm a) const { return x * 3 + static_cast<std::size_t>(a); }
  std::size_t xas(std::size_t x, Arm a, std::size_t s) const { return xa(x, a) * ns + s; }
  std::size_t ev(std::size_t x, std::size_t s, std::size_t t, int d) const {
    return ((x * ns + s) * (nt + 1) + t) * (J + 1) + static_cast<std::size_t>(d);
  }

  /// Discrete cause-specific hazards of the approved arm at (x, s).
  EventCurve curve(std::size_t x, std::size_t s, const std::vector<double>& times) const {
    std::vector<double> hazards(nt * J, 0.0);
    double at_risk = 0.0;
    for (std::size_t t = 0; t <= nt; ++t)
      for (std::size_t d = 0; d <= J; ++d) at_risk += events[ev(x, s, t, static_cast<int>(d))];
    for (std::size_t t = 0; t < nt; ++t) {
      double leaving = 0.0;
      for (std::size_t d = 0; d <= J; ++d) leaving += events[ev(x, s, t, static_cast<int>(d))];
      if (at_risk > 0.0)
        for (std::size_t k = 0; k < J; ++k) hazards[t * J + k] = events[ev(x, s, t, static_cast<int>(k + 1))] / at_risk;
      at_risk -= leaving;
    }
    return EventCurve(times, J, std::move(hazards));
  }

  /// G^C(u-) with events leaving the censoring risk set first.
  double censoring_before(std::size_t x, std::size_t s, double u, const std::vector<double>& times) const {
    double at_risk = 0.0;
    for (std::size_t t = 0; t <= nt; ++t)
      for (std::size_t d = 0; d <= J; ++d) at_risk += events[ev(x, s, t, static_cast<int>(d))];
    double g = 1.0;
    for (std::size_t t = 0; t < nt && times[t] < u; ++t) {
      double evs = 0.0;
      for (std::size_t k = 1; k <= J; ++k) evs += events[ev(x, s, t, static_cast<int>(k))];
      const double cens = events[ev(x, s, t, 0)];
      const double denom = at_risk - evs;
      if (denom > 0.0) g *= 1.0 - cens / denom;
      at_risk -= evs + cens;
    }
    return g;
  }
};

}  // namespace

class ToyNuisance final : public Nuisance {
 public:
  ToyNuisance(const DiscreteToyModel& toy, Tables tables) : toy_(toy), tb_(std::move(tables)) {}

  int causes() const override { return toy_.causes_; }
  double kappa() const override { return tb_.bridging / tb_.total; }
  Truncation truncation() const override { return Truncation::none(); }
  double prob_bridging(std::span<const double> x) const override {
    const auto xi = toy_.x_index(x);
    return tb_.pbx[xi] / tb_.px[xi];
  }
  double prob_historical_approved(std::span<const double> x) const override {
    const auto xi = toy_.x_index(x);
    return tb_.phxa[tb_.xa(xi, Arm::Approved)] / tb_.px[xi];
  }
  double prob_arm_bridging(Arm a, std::span<const double> x) const override {
    const auto xi = toy_.x_index(x);
    return tb_.pbxa[tb_.xa(xi, a)] / tb_.pbx[xi];
  }
  double marker_density(std::span<const double> s, std::span<const double> x, Trial trial, Arm a) const override {
    const auto xi = toy_.x_index(x);
    const auto si = toy_.s_index(s);
    if (trial == Trial::Bridging) return tb_.pbxas[tb_.xas(xi, a, si)] / tb_.pbxa[tb_.xa(xi, a)];
    return tb_.phxas[tb_.xas(xi, a, si)] / tb_.phxa[tb_.xa(xi, a)];
  }
  MarkerNodes marker_nodes(std::span<const double> x, Arm a) const override {
    const auto xi = toy_.x_index(x);
    MarkerNodes nodes;
    nodes.dim = static_cast<std::size_t>(toy_.causes_);
    for (std::size_t si = 0; si < tb_.ns; ++si) {
      nodes.points.insert(nodes.points.end(), toy_.s_values_[si].begin(), toy_.s_values_[si].end());
      nodes.weights.push_back(tb_.pbxas[tb_.xas(xi, a, si)] / tb_.pbxa[tb_.xa(xi, a)]);
    }
    return nodes;
  }
  EventCurve event_curve(std::span<const double> x, std::span<const double> s) const override {
    return tb_.curve(toy_.x_index(x), toy_.s_index(s), toy_.times_);
  }
  double censoring_survival_before(double u, std::span<const double> x, std::span<const double> s) const override {
    return tb_.censoring_before(toy_.x_index(x), toy_.s_index(s), u, toy_.times_);
  }

 private:
  const DiscreteToyModel& toy_;
  Tables tb_;
};

namespace {

Tables tabulate(const std::vector<double>& probs, std::size_t nx, std::size_t ns, std::size_t nt, std::size_t J,
                const auto& coords) {
  Tables tb;
  tb.nx = nx;
  tb.ns = ns;
  tb.nt = nt;
  tb.J = J;
  tb.px.assign(nx, 0.0);
  tb.pbx.assign(nx, 0.0);
  tb.pbxa.assign(nx * 3, 0.0);
  tb.pbxas.assign(nx * 3 * ns, 0.0);
  tb.phxa.assign(nx * 3, 0.0);
  tb.phxas.assign(nx * 3 * ns, 0.0);
  tb.events.assign(nx * ns * (nt + 1) * (J + 1), 0.0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto& c = coords[i];
    const double p = probs[i];
    tb.total += p;
    tb.px[c.x] += p;
    if (c.trial == Trial::Bridging) {
      tb.bridging += p;
      tb.pbx[c.x] += p;
      tb.pbxa[tb.xa(c.x, c.arm)] += p;
      tb.pbxas[tb.xas(c.x, c.arm, c.s)] += p;
    } else {
      tb.phxa[tb.xa(c.x, c.arm)] += p;
      tb.phxas[tb.xas(c.x, c.arm, c.s)] += p;
      if (c.arm == Arm::Approved) tb.events[tb.ev(c.x, c.s, c.time, c.delta)] += p;
    }
  }
  return tb;
}

}  // namespace

double DiscreteToyModel::functional(std::span<const double> probs, Arm a, double t, int cause) const {
  const std::vector<double> p(probs.begin(), probs.end());
  const Tables tb = tabulate(p, x_values_.size(), s_values_.size(), times_.size(), static_cast<std::size_t>(causes_), coords_);
  double psi = 0.0;
  for (std::size_t x = 0; x < tb.nx; ++x) {
    const double pa = tb.pbxa[tb.xa(x, a)];
    if (pa == 0.0) continue;
    double inner = 0.0;
    for (std::size_t s = 0; s < tb.ns; ++s) {
      const double ps = tb.pbxas[tb.xas(x, a, s)];
      if (ps == 0.0) continue;
      inner += ps / pa * tb.curve(x, s, times_).cif(cause, t);
    }
    psi += tb.pbx[x] / tb.bridging * inner;
  }
  return psi;
}

std::unique_ptr<Nuisance> DiscreteToyModel::nuisance(std::span<const double> probs) const {
  const std::vector<double> p(probs.begin(), probs.end());
  return std::make_unique<ToyNuisance>(
      *this, tabulate(p, x_values_.size(), s_values_.size(), times_.size(), static_cast<std::size_t>(causes_), coords_));
}

std::vector<EifForm> applicable_forms(const DiscreteToyModel& toy) {
  std::vector<EifForm> forms;
  if (!toy.has_censoring()) forms.push_back(EifForm::Complete);
  if (toy.causes() == 1) forms.push_back(EifForm::Censored);
  forms.push_back(EifForm::Competing);
  return forms;
}

GateauxReport gateaux_check(const DiscreteToyModel& toy, std::vector<double> eps) {
  if (eps.empty()) throw Error(ErrorCode::InvalidArgument, "empty eps grid");
  std::sort(eps.begin(), eps.end(), std::greater<>());
  const std::vector<double> base = toy.base_probabilities();
  const auto nu = toy.nuisance(base);
  const double kappa = nu->kappa();

  GateauxReport rep;
  rep.toy = toy.name();
  rep.forms = applicable_forms(toy);
  std::vector<double> perturbed(base.size());
  const auto& cells = toy.cells();
  for (Arm a : toy.bridging_arms()) {
    for (double t : toy.times()) {
      for (int j = 1; j <= toy.causes(); ++j) {
        const double psi = toy.functional(base, a, t, j);
        for (std::size_t o = 0; o < cells.size(); ++o) {
          // Central differences, then Richardson extrapolation over successive eps.
          std::vector<double> d;
          for (double h : eps) {
            auto at = [&](double e) {
              for (std::size_t i = 0; i < base.size(); ++i) perturbed[i] = (1.0 - e) * base[i];
              perturbed[o] += e;
              return toy.functional(perturbed, a, t, j);
            };
            d.push_back((at(h) - at(-h)) / (2.0 * h));
          }
          for (std::size_t level = 1; level < d.size(); ++level) {
            const double ratio = eps[level - 1] / eps[level];
            const double f = std::pow(ratio, 2.0 * static_cast<double>(level));
            for (std::size_t i = d.size() - 1; i >= level; --i) d[i] = (f * d[i] - d[i - 1]) / (f - 1.0);
          }
          const double numeric = d.back();
          const auto& rec = cells[o].record;
          for (EifForm form : rep.forms) {
            if (form == EifForm::Complete && rec.historical() && rec.delta && *rec.delta == 0 && *rec.time <= t) continue;
            const double phi = eif_terms(*nu, rec, a, t, j, form).total() - (rec.bridging() ? psi / kappa : 0.0);
            const double err = std::abs(numeric - phi);
            ++rep.comparisons;
            if (err > rep.max_error || rep.comparisons == 1) {
              rep.max_error = std::max(rep.max_error, err);
              rep.worst = {o, a, t, j, form, numeric, phi};
            }
          }
        }
      }
    }
  }
  return rep;
}

}  // namespace fusioncurve
