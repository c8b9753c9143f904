#include "fusioncurve/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "fusioncurve/error.hpp"
#include "fusioncurve/numeric.hpp"

namespace fusioncurve {

std::string_view arm_code(Arm arm) {
  switch (arm) {
    case Arm::Placebo: return "0";
    case Arm::Approved: return "1";
    case Arm::Investigational: return "1p";
  }
  return "?";
}

Arm parse_arm_code(std::string_view text) {
  if (text == "0") return Arm::Placebo;
  if (text == "1") return Arm::Approved;
  if (text == "1p") return Arm::Investigational;
  throw Error(ErrorCode::BadArmCode, "unknown arm code '" + std::string(text) + "'");
}

bool arm_allowed(Arm arm, Trial trial) {
  if (arm == Arm::Placebo) return trial == Trial::Historical;
  if (arm == Arm::Investigational) return trial == Trial::Bridging;
  return true;
}

FusedDataset::FusedDataset(std::vector<SubjectRecord> records, int causes, double horizon)
    : records_(std::move(records)), causes_(causes), horizon_(horizon) {
  if (records_.empty()) throw Error(ErrorCode::EmptyArm, "dataset has no records");
  if (causes_ < 1) throw Error(ErrorCode::InvalidArgument, "number of causes must be >= 1");
  dim_ = records_.front().x.size();
  std::size_t cells[2][3] = {{0, 0, 0}, {0, 0, 0}};
  max_time_ = 0.0;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    const std::string where = "record " + std::to_string(i);
    if (r.x.size() != dim_) throw Error(ErrorCode::BadValue, where + ": covariate dimension mismatch");
    if (r.s.size() != static_cast<std::size_t>(causes_))
      throw Error(ErrorCode::BadValue, where + ": marker length must equal the number of causes");
    for (double v : r.x)
      if (!std::isfinite(v)) throw Error(ErrorCode::BadValue, where + ": non-finite covariate");
    for (double v : r.s)
      if (!std::isfinite(v)) throw Error(ErrorCode::BadValue, where + ": non-finite marker");
    if (!arm_allowed(r.arm, r.trial))
      throw Error(ErrorCode::BadArmCode,
                  where + ": arm " + std::string(arm_code(r.arm)) + " not allowed in this study");
    if (r.historical()) {
      if (!r.time || !r.delta) throw Error(ErrorCode::MissingValue, where + ": historical row lacks outcome");
      if (!(*r.time > 0.0) || !std::isfinite(*r.time))
        throw Error(ErrorCode::NonPositiveTime, where + ": observed time must be positive");
      if (*r.delta < 0 || *r.delta > causes_)
        throw Error(ErrorCode::BadValue, where + ": event indicator out of range");
      max_time_ = std::max(max_time_, *r.time);
      ++n_h_;
    } else {
      if (r.time || r.delta) throw Error(ErrorCode::BadValue, where + ": bridging row carries an outcome");
      ++n_b_;
    }
    ++cells[static_cast<int>(r.trial)][static_cast<int>(r.arm)];
  }
  if (cells[0][static_cast<int>(Arm::Approved)] == 0)
    throw Error(ErrorCode::EmptyArm, "historical study has no approved-arm rows");
  if (n_b_ == 0) throw Error(ErrorCode::EmptyArm, "bridging study has no rows");
  for (int g = 0; g < 2; ++g)
    for (int a = 0; a < 3; ++a)
      if (cells[g][a] == 1)
        throw Error(ErrorCode::EmptyArm, std::string(g == 0 ? "historical" : "bridging") + " arm " +
                                             std::string(arm_code(static_cast<Arm>(a))) +
                                             " has fewer than 2 rows");
  if (!(horizon_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  if (horizon_ > max_time_)
    throw Error(ErrorCode::HorizonExceedsData,
                "horizon " + std::to_string(horizon_) + " exceeds the last observed time " +
                    std::to_string(max_time_));
}

std::size_t FusedDataset::count(Trial trial, Arm arm) const {
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [&](const auto& r) {
    return r.trial == trial && r.arm == arm;
  }));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  for (auto& f : out) {
    auto b = f.find_first_not_of(" \t");
    auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const std::string& file) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in " + file);
    return static_cast<std::size_t>(it - header.begin());
  }
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, path.string() + " is empty (header required)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  table.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    table.rows.push_back(split_csv_line(line));
  }
  return table;
}

bool is_missing(const std::string& v) { return v.empty() || v == "NA" || v == "NaN" || v == "nan"; }

const std::string& field_at(const std::vector<std::string>& row, std::size_t col, std::size_t row_index,
                            const std::string& name, const std::string& file) {
  if (col >= row.size() || is_missing(row[col]))
    throw Error(ErrorCode::MissingValue, file + " row " + std::to_string(row_index + 1) +
                                             ": missing value in column '" + name + "'");
  return row[col];
}

double parse_double(const std::string& text, std::size_t row_index, const std::string& name,
                    const std::string& file) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw Error(ErrorCode::BadValue, file + " row " + std::to_string(row_index + 1) + ": column '" +
                                         name + "' is not a finite number: '" + text + "'");
  return v;
}

std::vector<SubjectRecord> parse_rows(const std::filesystem::path& path, const CsvSchema& schema,
                                      Trial trial, bool with_outcome, bool check_placement = true) {
  const std::string file = path.filename().string();
  CsvTable table = read_csv(path);
  std::vector<std::size_t> xcols, scols;
  for (const auto& c : schema.covariates) xcols.push_back(table.column(c, file));
  for (const auto& c : schema.markers) scols.push_back(table.column(c, file));
  const std::size_t acol = table.column(schema.arm, file);
  std::size_t tcol = 0, ecol = 0;
  if (with_outcome) {
    tcol = table.column(schema.time, file);
    ecol = table.column(schema.event, file);
  }
  std::vector<SubjectRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    SubjectRecord r;
    r.trial = trial;
    for (std::size_t k = 0; k < xcols.size(); ++k)
      r.x.push_back(parse_double(field_at(row, xcols[k], i, schema.covariates[k], file), i,
                                 schema.covariates[k], file));
    for (std::size_t k = 0; k < scols.size(); ++k)
      r.s.push_back(
          parse_double(field_at(row, scols[k], i, schema.markers[k], file), i, schema.markers[k], file));
    const std::string& code = field_at(row, acol, i, schema.arm, file);
    try {
      r.arm = parse_arm_code(code);
    } catch (const Error&) {
      throw Error(ErrorCode::BadArmCode, file + " row " + std::to_string(i + 1) + ": arm code '" + code +
                                             "' is not one of 0, 1, 1p");
    }
    if (with_outcome) {
      double t = parse_double(field_at(row, tcol, i, schema.time, file), i, schema.time, file);
      if (!(t > 0.0))
        throw Error(ErrorCode::NonPositiveTime,
                    file + " row " + std::to_string(i + 1) + ": observed time must be positive");
      double d = parse_double(field_at(row, ecol, i, schema.event, file), i, schema.event, file);
      if (d != std::floor(d) || d < 0.0)
        throw Error(ErrorCode::BadValue,
                    file + " row " + std::to_string(i + 1) + ": event indicator must be a nonnegative integer");
      r.time = t;
      r.delta = static_cast<int>(d);
    }
    if (check_placement && trial == Trial::Historical && !arm_allowed(r.arm, trial))
      throw Error(ErrorCode::BadArmCode, file + " row " + std::to_string(i + 1) + ": arm '" + code +
                                             "' is not allowed in the historical trial");
    if (trial == Trial::Bridging && !arm_allowed(r.arm, trial))
      throw Error(ErrorCode::BadArmCode, file + " row " + std::to_string(i + 1) + ": arm '" + code +
                                             "' is not allowed in the bridging study");
    out.push_back(std::move(r));
  }
  return out;
}


}  // namespace

FusedDataset load_fused_csv(const std::filesystem::path& historical, const std::filesystem::path& bridging,
                            const CsvSchema& schema, double horizon) {
  auto records = parse_rows(historical, schema, Trial::Historical, true);
  auto bridge = parse_rows(bridging, schema, Trial::Bridging, false);
  if (records.empty()) throw Error(ErrorCode::EmptyArm, historical.string() + " has no data rows");
  if (bridge.empty()) throw Error(ErrorCode::EmptyArm, bridging.string() + " has no data rows");
  records.insert(records.end(), std::make_move_iterator(bridge.begin()), std::make_move_iterator(bridge.end()));
  return FusedDataset(std::move(records), static_cast<int>(schema.markers.size()), horizon);
}

FusedDataset load_fused_csv(const std::filesystem::path& historical, const std::filesystem::path& bridging,
                            const CsvSchema& schema) {
  const auto rows = parse_rows(historical, schema, Trial::Historical, true);
  double horizon = 0.0;
  for (const auto& r : rows) horizon = std::max(horizon, *r.time);
  return load_fused_csv(historical, bridging, schema, horizon);
}

std::vector<SubjectRecord> load_outcome_csv(const std::filesystem::path& path, const CsvSchema& schema,
                                            int causes) {
  const std::string file = path.filename().string();
  auto rows = parse_rows(path, schema, Trial::Historical, true, false);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].arm == Arm::Placebo)
      throw Error(ErrorCode::BadArmCode, file + " row " + std::to_string(i + 1) +
                                             ": only arms 1 and 1p are allowed in a two-arm trial file");
    if (*rows[i].delta > causes)
      throw Error(ErrorCode::BadValue, file + " row " + std::to_string(i + 1) + ": event indicator out of range");
  }
  return rows;
}

void write_fused_csv(const FusedDataset& ds, const std::filesystem::path& historical,
                     const std::filesystem::path& bridging, const CsvSchema& schema) {
  if (schema.covariates.size() != ds.dim() || schema.markers.size() != static_cast<std::size_t>(ds.causes()))
    throw Error(ErrorCode::InvalidArgument, "schema does not match dataset dimensions");
  std::ofstream h(historical), b(bridging);
  if (!h || !b) throw Error(ErrorCode::Io, "cannot open output CSV files");
  auto header = [&](std::ostream& os, bool outcome) {
    for (const auto& c : schema.covariates) os << c << ',';
    os << schema.arm;
    for (const auto& m : schema.markers) os << ',' << m;
    if (outcome) os << ',' << schema.time << ',' << schema.event;
    os << '\n';
  };
  header(h, true);
  header(b, false);
  for (const auto& r : ds.records()) {
    std::ostream& os = r.historical() ? static_cast<std::ostream&>(h) : static_cast<std::ostream&>(b);
    for (double v : r.x) os << format_double(v) << ',';
    os << arm_code(r.arm);
    for (double v : r.s) os << ',' << format_double(v);
    if (r.historical()) os << ',' << format_double(*r.time) << ',' << *r.delta;
    os << '\n';
  }
}

OverlapDiagnostic overlap_report(const FusedDataset& ds) {
  OverlapDiagnostic diag;
  const std::size_t d = ds.dim();
  const double inf = std::numeric_limits<double>::infinity();
  diag.coordinates.assign(d, {inf, -inf, inf, -inf, 0.0});
  for (const auto& r : ds.records()) {
    for (std::size_t k = 0; k < d; ++k) {
      auto& c = diag.coordinates[k];
      if (r.historical()) {
        c.historical_min = std::min(c.historical_min, r.x[k]);
        c.historical_max = std::max(c.historical_max, r.x[k]);
      } else {
        c.bridging_min = std::min(c.bridging_min, r.x[k]);
        c.bridging_max = std::max(c.bridging_max, r.x[k]);
      }
    }
  }
  std::vector<std::size_t> outside(d, 0);
  std::size_t any = 0;
  for (const auto& r : ds.records()) {
    if (!r.bridging()) continue;
    bool out_any = false;
    for (std::size_t k = 0; k < d; ++k) {
      const auto& c = diag.coordinates[k];
      if (r.x[k] < c.historical_min || r.x[k] > c.historical_max) {
        ++outside[k];
        out_any = true;
      }
    }
    any += out_any ? 1 : 0;
  }
  const double nb = static_cast<double>(ds.n_bridging());
  for (std::size_t k = 0; k < d; ++k) diag.coordinates[k].outside_fraction = static_cast<double>(outside[k]) / nb;
  diag.outside_any_fraction = static_cast<double>(any) / nb;
  return diag;
}

TrimResult trim_to_overlap(const FusedDataset& ds) {
  const auto diag = overlap_report(ds);
  std::vector<SubjectRecord> kept;
  kept.reserve(ds.size());
  std::size_t dropped = 0;
  for (const auto& r : ds.records()) {
    bool inside = true;
    if (r.bridging()) {
      for (std::size_t k = 0; k < ds.dim(); ++k) {
        const auto& c = diag.coordinates[k];
        if (r.x[k] < c.historical_min || r.x[k] > c.historical_max) {
          inside = false;
          break;
        }
      }
    }
    if (inside)
      kept.push_back(r);
    else
      ++dropped;
  }
  if (dropped == ds.n_bridging())
    throw Error(ErrorCode::AllBridgingDropped, "no bridging rows inside the historical covariate range");
  return {FusedDataset(std::move(kept), ds.causes(), ds.horizon()), dropped};
}

}  // namespace fusioncurve
