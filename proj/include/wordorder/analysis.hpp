#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wordorder {

// One pipeline run's summary metrics; the regression's unit of observation.
struct RunRecord {
  std::string language;
  std::string variant;
  std::string dataset_size;
  long long seed = 0;
  double mean_surprisal = 0.0;
  double uid_v = 0.0;
  double uid_lv = 0.0;
  double uid_p = 0.0;

  bool operator==(const RunRecord&) const = default;
};

inline constexpr const char* kRunRecordHeader =
    "language,variant,dataset_size,seed,mean_surprisal,uid_v,uid_lv,uid_p";

std::vector<RunRecord> read_run_records(std::istream& in);
// Writes sorted by (language, variant, dataset_size, seed).
void write_run_records(std::ostream& out, std::vector<RunRecord> records);
// Replaces the row with the same (language, variant, dataset_size, seed),
// otherwise appends.
void upsert_run_record(std::vector<RunRecord>& records, RunRecord record);

// "20M" -> 2e7 etc.; labels without a leading number parse as nullopt.
std::optional<double> dataset_size_value(const std::string& label);

// Design matrix for the treatment-coded regression: intercept, indicator
// per non-reference variant (canonical variant order), indicator per
// non-reference dataset size (reference = largest), mean surprisal;
// response is uid_p.
struct Design {
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> rows;
  std::vector<double> response;
  std::string reference_variant;
  std::string reference_size;
};

Design treatment_encode(const std::vector<RunRecord>& records,
                        const std::string& reference_variant);

struct RegressionResult {
  std::vector<std::string> terms;
  std::vector<double> estimates;
  std::vector<double> std_errors;
  double r_squared = 0.0;
  std::size_t n = 0;
  std::string reference_variant;
  std::string reference_size;
};

// Least squares via column-pivoted QR; throws DataError on rank deficiency
// (naming the collinear columns) or too few rows.
RegressionResult ols_fit(const std::vector<std::vector<double>>& rows,
                         const std::vector<double>& response,
                         const std::vector<std::string>& column_names);

RegressionResult fit_design(const Design& design);

// Per-language treatment-coded fits, languages in sorted order.
std::vector<std::pair<std::string, RegressionResult>> regress_by_language(
    const std::vector<RunRecord>& records,
    const std::string& reference_variant);

// CSV: language, term, estimate, std_error.
void write_coefficients_csv(
    std::ostream& out,
    const std::vector<std::pair<std::string, RegressionResult>>& fits);

struct ReportOptions {
  int bootstrap_resamples = 2000;
  std::uint64_t bootstrap_seed = 2024;
  // Pairs of variant tags to compare with a sign test, e.g. {"Real","Reverse"}.
  std::vector<std::pair<std::string, std::string>> comparisons;
};

struct GroupSummary {
  std::string language;
  std::string variant;
  std::string metric;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

struct ComparisonRow {
  std::string language;
  std::string metric;
  std::string first;
  std::string second;
  std::size_t n_pairs = 0;
  std::size_t first_lower = 0;  // pairs where first's value < second's
  double p_value = 1.0;         // two-sided exact sign test
};

struct Report {
  std::vector<GroupSummary> groups;
  std::vector<ComparisonRow> comparisons;
};

Report variant_report(const std::vector<RunRecord>& records,
                      const ReportOptions& options);

// CSV: language, variant, metric, mean, ci_low, ci_high, n.
void write_report_csv(std::ostream& out, const Report& report);
// CSV: language, metric, first, second, n_pairs, first_lower, p_value.
void write_comparisons_csv(std::ostream& out, const Report& report);

}  // namespace wordorder
