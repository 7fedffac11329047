#pragma once

#include "rdkg/matrix.hpp"
#include "rdkg/trace.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace rdkg::analysis {

/// Index of the trace point farthest from the chord joining the first and
/// last points, measured after min-max normalizing each axis over the trace.
/// Ties go to the lower objective, then the lower t. When every distance is
/// below 1e-9 the point with the lowest objective is returned.
/// Throws InputError("trace too short") for fewer than two points.
std::size_t knee_point(std::span<const RdPoint> points);

/// Percentile with linear interpolation between closest ranks
/// (rank = p/100 * (n - 1)). Throws InputError on an empty sample.
double percentile_linear(std::vector<double> values, double pct);

enum class ToleranceMode { AllEntries, RowMinima };

inline constexpr double kCoveragePercentile = 30.0;

/// 30th percentile of the feature-cost distribution (all N*M entries, or the
/// per-row minima).
double coverage_tolerance(const Matrix& feat, ToleranceMode mode = ToleranceMode::AllEntries);

/// Fraction of rows whose best-aligned column (argmax of the plan row, lowest
/// index on ties) has feature cost within the coverage tolerance.
double coverage(const Matrix& feat, const Matrix& plan, ToleranceMode mode = ToleranceMode::AllEntries);

std::string rd_curve_csv(const RdTrace& trace);
nlohmann::json plot_data(const RdTrace& trace, std::size_t knee);
nlohmann::json report_json(const RdTrace& trace, std::optional<double> coverage_before,
                           std::optional<double> coverage_after, std::size_t knee, const nlohmann::json& config);

/// Writes rd_curve.csv, report.json and plot_data.json into out_dir,
/// creating it when absent. Throws InputError when the directory is unwritable.
void emit_report(const RdTrace& trace, std::optional<double> coverage_before, std::optional<double> coverage_after,
                 std::size_t knee, const nlohmann::json& config, const std::filesystem::path& out_dir);

}  // namespace rdkg::analysis
