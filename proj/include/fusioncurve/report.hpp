#pragma once

#include <json.hpp>
#include <ostream>
#include <span>
#include <string>

#include "fusioncurve/dataset.hpp"
#include "fusioncurve/estimator.hpp"
#include "fusioncurve/simlab.hpp"
#include "fusioncurve/toy.hpp"

namespace fusioncurve {

inline constexpr int kSchemaVersion = 1;

// CSV writers: one row per grid point, round-trip precision.
void write_curve_csv(const CurveEstimate& curve, std::ostream& out);
void write_relve_csv(const RelVeEstimate& rv, std::ostream& out);
/// Columns: n_h, c, mean, median, bias, pct_bias, rmse, avg_se, coverage.
void write_table1_csv(std::span<const sim::SummaryRow> rows, std::ostream& out);

nlohmann::json to_json(const CurveEstimate& curve);
nlohmann::json to_json(const RelVeEstimate& rv, const BootstrapSe* boot = nullptr);
nlohmann::json to_json(const NcdeTestResult& r);
nlohmann::json table1_json(std::span<const sim::SummaryRow> rows);
nlohmann::json to_json(const GateauxReport& r);

/// Human-readable run summary with overlap diagnostics and truncation counts.
void write_report(const FusedDataset& ds, const CurveEstimate& curve, const OverlapDiagnostic& overlap,
                  std::ostream& out);

}  // namespace fusioncurve
