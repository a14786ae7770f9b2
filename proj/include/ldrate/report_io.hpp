#pragma once

// Report files. JSON holds the structured reports; CSV holds the tables meant
// for plotting. All files are UTF-8 with LF line endings. CSV numbers use 17
// significant digits, JSON numbers the shortest text that parses back to the
// same double, and +inf is written as the string "inf" in both.
//
//   rates.csv      kind,label,x1..xd,rate
//   empirical.csv  n,x1..xd,count,rate,predicted,abs_error
//   paths.csv      path,from,to,horizon,k,t,x1..xd
//
// Empty CSV cells mean "not available" (censored bins, bins not compared).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ldrate/pipeline.hpp"

namespace ldrate {

struct RateRow {
  std::string kind;  // attractor, point or offset
  std::string label;
  Vec position;
  ExtCost rate;
  friend bool operator==(const RateRow&, const RateRow&);
};

struct EmpiricalRow {
  int n = 1;
  Vec center;
  std::uint64_t count = 0;
  std::optional<double> rate;
  std::optional<double> predicted;
  std::optional<double> abs_error;
  friend bool operator==(const EmpiricalRow&, const EmpiricalRow&);
};

/// What report.json of `validate` holds besides the empirical table.
struct ValidationSummary {
  RateReport rates;  // without paths
  std::uint64_t seed = 0;
  std::uint64_t min_count = 1;
  ErrorTrend trend;
  bool trend_ok = false;
};

std::vector<RateRow> rate_rows(const RateReport& report);
std::vector<RateRow> rate_rows(const LinearReport& report);
/// Every bin of every ladder step, in (n, bin) order.
std::vector<EmpiricalRow> empirical_rows(const ValidationRun& run);
/// Escape profiles as paths from the equilibrium (label "E<i>") to each offset.
std::vector<PathRecord> profile_paths(const LinearReport& report);
ValidationSummary summarize(const ValidationRun& run);

std::string equilibria_json(const std::vector<EquilibriumRow>& rows);
std::string rate_report_json(const RateReport& report);  // paths excluded
std::string validation_json(const ValidationSummary& summary);
std::string linear_report_json(const LinearReport& report);

/// Readers throw std::runtime_error on malformed input.
std::vector<EquilibriumRow> parse_equilibria_json(std::string_view text);
RateReport parse_rate_report_json(std::string_view text);
ValidationSummary parse_validation_json(std::string_view text);
LinearReport parse_linear_report_json(std::string_view text);

std::string rates_csv(const std::vector<RateRow>& rows);
std::string empirical_csv(const std::vector<EmpiricalRow>& rows);
std::string paths_csv(const std::vector<PathRecord>& paths);
std::vector<RateRow> parse_rates_csv(std::string_view text);
std::vector<EmpiricalRow> parse_empirical_csv(std::string_view text);
std::vector<PathRecord> parse_paths_csv(std::string_view text);

/// Exact (bitwise on doubles) equality of the in-memory structures.
bool identical(const RateReport& a, const RateReport& b);
bool identical(const ValidationSummary& a, const ValidationSummary& b);
bool identical(const LinearReport& a, const LinearReport& b);
bool identical(const std::vector<EquilibriumRow>& a, const std::vector<EquilibriumRow>& b);
bool identical(const std::vector<PathRecord>& a, const std::vector<PathRecord>& b);

// Output directories. Each writer creates `dir` if needed.
void write_attractor_outputs(const std::filesystem::path& dir, const std::vector<EquilibriumRow>& rows);
void write_rate_outputs(const std::filesystem::path& dir, const RateReport& report);
void write_validation_outputs(const std::filesystem::path& dir, const ValidationRun& run);
void write_linear_outputs(const std::filesystem::path& dir, const LinearReport& report);

/// report.json plus paths.csv of a `rates` run.
RateReport read_rate_outputs(const std::filesystem::path& dir);

std::string read_text(const std::filesystem::path& file);
void write_text(const std::filesystem::path& file, std::string_view text);

}  // namespace ldrate
