#include "fusioncurve/features.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "fusioncurve/error.hpp"

namespace fusioncurve {

double FeatureTerm::eval(std::span<const double> x, std::span<const double> s, bool approved,
                         int own_marker) const {
  double v = 1.0;
  for (const auto& f : factors) {
    switch (f.kind) {
      case Kind::Covariate: v *= x[f.index]; break;
      case Kind::OwnMarker: v *= s[own_marker]; break;
      case Kind::Marker: v *= s[f.index]; break;
      case Kind::Approved: v *= approved ? 1.0 : 0.0; break;
    }
  }
  return v;
}

bool FeatureTerm::uses_marker() const {
  return std::any_of(factors.begin(), factors.end(),
                     [](const Factor& f) { return f.kind == Kind::OwnMarker || f.kind == Kind::Marker; });
}

bool FeatureTerm::uses_arm() const {
  return std::any_of(factors.begin(), factors.end(), [](const Factor& f) { return f.kind == Kind::Approved; });
}

std::string FeatureTerm::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) out += '*';
    const auto& f = factors[i];
    switch (f.kind) {
      case Kind::Covariate: out += "x" + std::to_string(f.index + 1); break;
      case Kind::OwnMarker: out += "s"; break;
      case Kind::Marker: out += "s" + std::to_string(f.index + 1); break;
      case Kind::Approved: out += "a"; break;
    }
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

FeatureTerm::Factor parse_factor(const std::string& tok) {
  auto index_of = [&](std::size_t pos) {
    const std::string digits = tok.substr(pos);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
      throw Error(ErrorCode::InvalidArgument, "bad feature token '" + tok + "'");
    int idx = std::stoi(digits);
    if (idx < 1) throw Error(ErrorCode::InvalidArgument, "feature indices are 1-based: '" + tok + "'");
    return idx - 1;
  };
  if (tok == "a") return {FeatureTerm::Kind::Approved, 0};
  if (tok == "s") return {FeatureTerm::Kind::OwnMarker, 0};
  if (!tok.empty() && tok[0] == 'x') return {FeatureTerm::Kind::Covariate, index_of(1)};
  if (!tok.empty() && tok[0] == 's') return {FeatureTerm::Kind::Marker, index_of(1)};
  throw Error(ErrorCode::InvalidArgument, "bad feature token '" + tok + "'");
}

}  // namespace

FeatureSpec FeatureSpec::parse(const std::string& text) {
  std::vector<FeatureTerm> terms;
  const std::string all = trim(text);
  if (all.empty() || all == "1" || all == "intercept") return FeatureSpec{};
  std::stringstream ss(all);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw Error(ErrorCode::InvalidArgument, "empty feature term in '" + text + "'");
    if (item.front() == '*' || item.back() == '*')
      throw Error(ErrorCode::InvalidArgument, "dangling '*' in feature term '" + item + "'");
    FeatureTerm term;
    std::stringstream ts(item);
    std::string tok;
    while (std::getline(ts, tok, '*')) term.factors.push_back(parse_factor(trim(tok)));
    terms.push_back(std::move(term));
  }
  return FeatureSpec(std::move(terms));
}

FeatureSpec FeatureSpec::linear(std::size_t dim) {
  std::vector<FeatureTerm> terms;
  for (std::size_t j = 0; j < dim; ++j)
    terms.push_back(FeatureTerm{{{FeatureTerm::Kind::Covariate, static_cast<int>(j)}}});
  return FeatureSpec(std::move(terms));
}

bool FeatureSpec::uses_marker() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.uses_marker(); });
}

bool FeatureSpec::uses_arm() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.uses_arm(); });
}

std::size_t FeatureSpec::max_covariate() const {
  std::size_t m = 0;
  for (const auto& t : terms_)
    for (const auto& f : t.factors)
      if (f.kind == FeatureTerm::Kind::Covariate) m = std::max(m, static_cast<std::size_t>(f.index) + 1);
  return m;
}

std::size_t FeatureSpec::max_marker() const {
  std::size_t m = 0;
  for (const auto& t : terms_)
    for (const auto& f : t.factors)
      if (f.kind == FeatureTerm::Kind::Marker) m = std::max(m, static_cast<std::size_t>(f.index) + 1);
  return m;
}

void FeatureSpec::eval(std::span<const double> x, std::span<const double> s, bool approved, int own_marker,
                       std::span<double> out) const {
  for (std::size_t i = 0; i < terms_.size(); ++i) out[i] = terms_[i].eval(x, s, approved, own_marker);
}

std::string FeatureSpec::to_string() const {
  if (terms_.empty()) return "1";
  std::string out;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i) out += ',';
    out += terms_[i].to_string();
  }
  return out;
}

}  // namespace fusioncurve
