#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fusioncurve {

/// Vaccine assignment. Placebo only occurs in the historical trial and
/// Investigational only in the bridging study.
enum class Arm : std::uint8_t { Placebo = 0, Approved = 1, Investigational = 2 };

enum class Trial : std::uint8_t { Historical = 0, Bridging = 1 };

/// File codes: "0", "1", "1p".
std::string_view arm_code(Arm arm);
Arm parse_arm_code(std::string_view text);
bool arm_allowed(Arm arm, Trial trial);

struct SubjectRecord {
  std::vector<double> x;
  Arm arm = Arm::Approved;
  Trial trial = Trial::Historical;
  std::vector<double> s;
  std::optional<double> time;  // observed min(T, C); historical only
  std::optional<int> delta;    // 0 = censored, k = cause-k event

  bool historical() const { return trial == Trial::Historical; }
  bool bridging() const { return trial == Trial::Bridging; }
};

/// Immutable fused two-study sample. Construction validates every record.
class FusedDataset {
 public:
  FusedDataset(std::vector<SubjectRecord> records, int causes, double horizon);

  std::span<const SubjectRecord> records() const { return records_; }
  const SubjectRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  std::size_t n_historical() const { return n_h_; }
  std::size_t n_bridging() const { return n_b_; }
  std::size_t dim() const { return dim_; }
  int causes() const { return causes_; }
  double horizon() const { return horizon_; }
  double max_time() const { return max_time_; }
  /// n_b / (n_h + n_b)
  double kappa() const { return static_cast<double>(n_b_) / static_cast<double>(size()); }
  std::size_t count(Trial trial, Arm arm) const;

 private:
  std::vector<SubjectRecord> records_;
  int causes_ = 1;
  double horizon_ = 0.0;
  double max_time_ = 0.0;
  std::size_t n_h_ = 0;
  std::size_t n_b_ = 0;
  std::size_t dim_ = 0;
};

struct CsvSchema {
  std::vector<std::string> covariates;
  std::string arm = "arm";
  std::vector<std::string> markers{"s"};
  std::string time = "time";
  std::string event = "event";
};

FusedDataset load_fused_csv(const std::filesystem::path& historical,
                            const std::filesystem::path& bridging, const CsvSchema& schema,
                            double horizon);

/// Same, with the horizon set to the last observed historical time.
FusedDataset load_fused_csv(const std::filesystem::path& historical,
                            const std::filesystem::path& bridging, const CsvSchema& schema);

/// Writes with round-trip precision so that reloading reproduces the records bitwise.
void write_fused_csv(const FusedDataset& ds, const std::filesystem::path& historical,
                     const std::filesystem::path& bridging, const CsvSchema& schema);

/// Reads a single-trial file where every row carries an outcome (used by the
/// no-controlled-direct-effects test). Rows are tagged Historical.
std::vector<SubjectRecord> load_outcome_csv(const std::filesystem::path& path,
                                            const CsvSchema& schema, int causes);

struct OverlapDiagnostic {
  struct Coordinate {
    double historical_min = 0.0;
    double historical_max = 0.0;
    double bridging_min = 0.0;
    double bridging_max = 0.0;
    double outside_fraction = 0.0;  // bridging rows outside the historical range
  };
  std::vector<Coordinate> coordinates;
  double outside_any_fraction = 0.0;  // bridging rows outside the box in any coordinate
};

OverlapDiagnostic overlap_report(const FusedDataset& ds);

struct TrimResult {
  FusedDataset data;
  std::size_t dropped = 0;
};

/// Drops bridging rows outside the per-coordinate historical covariate box.
TrimResult trim_to_overlap(const FusedDataset& ds);

}  // namespace fusioncurve
