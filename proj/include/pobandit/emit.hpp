#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pobandit/harness.hpp"

namespace pobandit {

/// One row of the long-format output: experiment,policy,run,series,t,value.
/// `run` is a run index for per-run rows and "mean"/"worst" for aggregates.
struct CsvRow {
  std::string experiment;
  std::string policy;
  std::string run;
  std::string series;
  std::size_t t = 0;
  double value = 0.0;

  friend bool operator==(const CsvRow&, const CsvRow&) = default;
};

inline constexpr const char* kCsvHeader = "experiment,policy,run,series,t,value";

/// %.17g, which round-trips every double exactly.
std::string format_value(double v);

void write_csv(std::ostream& out, std::span<const CsvRow> rows);
std::vector<CsvRow> read_csv(std::istream& in);

/// Aggregate rows (mean and worst) for each series.
std::vector<CsvRow> curve_rows(const std::string& experiment, std::span<const SeriesCurve> curves);
/// Per-run rows on the report's grid.
std::vector<CsvRow> run_rows(const ExperimentReport& report);

/// Standalone SVG line chart: mean (solid) and worst (dashed) per policy.
void write_svg(std::ostream& out, const std::string& title, std::span<const SeriesCurve> curves);

struct EmittedFiles {
  std::filesystem::path curves_csv;
  std::filesystem::path runs_csv;
  std::filesystem::path report_txt;
  std::vector<std::filesystem::path> svgs;
};

/// Spec echo, per-run seeds and wall-clock time.
void write_report(std::ostream& out, const ExperimentReport& report);

/// Writes <name>_curves.csv, <name>_runs.csv, <name>_report.txt and, if
/// requested, one SVG per series into `dir`.
EmittedFiles emit(const ExperimentReport& report, const std::filesystem::path& dir, bool svg);

}  // namespace pobandit
