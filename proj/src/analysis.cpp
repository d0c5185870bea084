#include "wordorder/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "wordorder/corpus.hpp"
#include "wordorder/errors.hpp"
#include "wordorder/util.hpp"

namespace wordorder {

namespace {

std::string run_key(const RunRecord& r) {
  return r.language + "," + r.variant + "," + r.dataset_size + "," +
         std::to_string(r.seed);
}

void validate_record(const RunRecord& r, const std::string& where) {
  if (r.language.empty()) throw DataError(where + ": empty language");
  variant_from_string(r.variant);  // throws on unknown tags
  if (r.dataset_size.empty()) throw DataError(where + ": empty dataset_size");
  for (const std::string* field : {&r.language, &r.dataset_size})
    if (field->find(',') != std::string::npos)
      throw DataError(where + ": comma in field '" + *field + "'");
  for (double v : {r.mean_surprisal, r.uid_v, r.uid_lv, r.uid_p})
    if (!std::isfinite(v)) throw DataError(where + ": non-finite metric");
}

bool run_less(const RunRecord& a, const RunRecord& b) {
  return std::tie(a.language, a.variant, a.dataset_size, a.seed) <
         std::tie(b.language, b.variant, b.dataset_size, b.seed);
}

struct Interval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

Interval bootstrap_mean(const std::vector<double>& values, int resamples,
                        std::uint64_t seed) {
  Interval out;
  out.mean = mean(values);
  const std::size_t n = values.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(resamples));
  std::vector<double> resample(n);
  for (int b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i) resample[i] = values[pick(rng)];
    means.push_back(mean(resample));
  }
  std::sort(means.begin(), means.end());
  auto quantile = [&](double q) {
    auto rank =
        static_cast<std::size_t>(std::ceil(q * static_cast<double>(means.size())));
    if (rank > 0) --rank;
    return means[std::min(rank, means.size() - 1)];
  };
  out.lo = std::min(quantile(0.025), out.mean);
  out.hi = std::max(quantile(0.975), out.mean);
  return out;
}

// Two-sided exact sign test over the non-tied pairs.
double sign_test_p(std::size_t wins, std::size_t losses) {
  const std::size_t n = wins + losses;
  if (n == 0) return 1.0;
  const std::size_t k = std::min(wins, losses);
  double tail = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    double log_c = std::lgamma(double(n) + 1) - std::lgamma(double(i) + 1) -
                   std::lgamma(double(n - i) + 1);
    tail += std::exp(log_c - double(n) * std::log(2.0));
  }
  return std::min(1.0, 2.0 * tail);
}

const std::vector<std::pair<const char*, double RunRecord::*>> kMetricFields = {
    {"mean_surprisal", &RunRecord::mean_surprisal},
    {"uid_v", &RunRecord::uid_v},
    {"uid_lv", &RunRecord::uid_lv},
    {"uid_p", &RunRecord::uid_p},
};

}  // namespace

std::vector<RunRecord> read_run_records(std::istream& in) {
  std::string line;
  long long line_no = 0;
  bool saw_header = false;
  std::vector<RunRecord> out;
  std::set<std::string> keys;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (!saw_header) {
      if (body != kRunRecordHeader)
        throw DataError("run records line " + std::to_string(line_no) +
                        ": expected header '" + kRunRecordHeader + "'");
      saw_header = true;
      continue;
    }
    auto fields = split(body, ',');
    std::string where = "run records line " + std::to_string(line_no);
    if (fields.size() != 8)
      throw DataError(where + ": expected 8 fields, found " +
                      std::to_string(fields.size()));
    RunRecord r;
    r.language = std::string(fields[0]);
    r.variant = std::string(fields[1]);
    r.dataset_size = std::string(fields[2]);
    if (!parse_int(fields[3], r.seed))
      throw DataError(where + ": bad seed '" + std::string(fields[3]) + "'");
    double* targets[] = {&r.mean_surprisal, &r.uid_v, &r.uid_lv, &r.uid_p};
    for (int i = 0; i < 4; ++i)
      if (!parse_double(fields[4 + i], *targets[i]))
        throw DataError(where + ": bad number '" + std::string(fields[4 + i]) +
                        "'");
    validate_record(r, where);
    if (!keys.insert(run_key(r)).second)
      throw DataError(where + ": duplicate run (" + run_key(r) + ")");
    out.push_back(std::move(r));
  }
  if (!saw_header) throw DataError("run records: missing header");
  return out;
}

void write_run_records(std::ostream& out, std::vector<RunRecord> records) {
  std::sort(records.begin(), records.end(), run_less);
  out << kRunRecordHeader << "\n";
  for (const auto& r : records) {
    validate_record(r, "run record for " + r.language);
    out << r.language << ',' << r.variant << ',' << r.dataset_size << ','
        << r.seed << ',' << format_double(r.mean_surprisal) << ','
        << format_double(r.uid_v) << ',' << format_double(r.uid_lv) << ','
        << format_double(r.uid_p) << "\n";
  }
}

void upsert_run_record(std::vector<RunRecord>& records, RunRecord record) {
  for (auto& existing : records) {
    if (existing.language == record.language &&
        existing.variant == record.variant &&
        existing.dataset_size == record.dataset_size &&
        existing.seed == record.seed) {
      existing = std::move(record);
      return;
    }
  }
  records.push_back(std::move(record));
}

std::optional<double> dataset_size_value(const std::string& label) {
  const char* start = label.c_str();
  char* end = nullptr;
  double value = std::strtod(start, &end);
  if (end == start || !std::isfinite(value)) return std::nullopt;
  std::string_view suffix = trim(std::string_view(end));
  if (suffix.empty()) return value;
  if (suffix.size() != 1) return std::nullopt;
  switch (suffix[0]) {
    case 'k': case 'K': return value * 1e3;
    case 'm': case 'M': return value * 1e6;
    case 'g': case 'G':
    case 'b': case 'B': return value * 1e9;
    default: return std::nullopt;
  }
}

namespace {

// Largest by parsed value; unparseable labels rank below parsed ones and
// fall back to lexicographic order.
std::string largest_size(const std::set<std::string>& sizes) {
  auto rank = [](const std::string& label) {
    auto value = dataset_size_value(label);
    return std::make_tuple(value.has_value(),
                           value.value_or(0.0), label);
  };
  return *std::max_element(
      sizes.begin(), sizes.end(),
      [&](const std::string& a, const std::string& b) { return rank(a) < rank(b); });
}

}  // namespace

Design treatment_encode(const std::vector<RunRecord>& records,
                        const std::string& reference_variant) {
  if (records.empty()) throw DataError("treatment_encode: no records");
  variant_from_string(reference_variant);
  std::set<std::string> variants, sizes;
  for (const auto& r : records) {
    variants.insert(r.variant);
    sizes.insert(r.dataset_size);
  }
  if (!variants.count(reference_variant))
    throw ConfigError("reference variant '" + reference_variant +
                      "' not present in the records");
  Design design;
  design.reference_variant = reference_variant;
  design.reference_size = largest_size(sizes);

  std::vector<std::string> variant_columns;
  for (Variant v : all_variants()) {
    std::string tag = variant_name(v);
    if (tag != reference_variant && variants.count(tag))
      variant_columns.push_back(tag);
  }
  std::vector<std::string> size_columns(sizes.begin(), sizes.end());
  size_columns.erase(std::remove(size_columns.begin(), size_columns.end(),
                                 design.reference_size),
                     size_columns.end());
  std::sort(size_columns.begin(), size_columns.end(),
            [](const std::string& a, const std::string& b) {
              auto va = dataset_size_value(a), vb = dataset_size_value(b);
              return std::make_tuple(va.has_value(), va.value_or(0.0), a) >
                     std::make_tuple(vb.has_value(), vb.value_or(0.0), b);
            });

  design.column_names.push_back("(intercept)");
  for (const auto& tag : variant_columns)
    design.column_names.push_back("variant=" + tag);
  for (const auto& label : size_columns)
    design.column_names.push_back("size=" + label);
  design.column_names.push_back("mean_surprisal");

  for (const auto& r : records) {
    std::vector<double> row;
    row.reserve(design.column_names.size());
    row.push_back(1.0);
    for (const auto& tag : variant_columns)
      row.push_back(r.variant == tag ? 1.0 : 0.0);
    for (const auto& label : size_columns)
      row.push_back(r.dataset_size == label ? 1.0 : 0.0);
    row.push_back(r.mean_surprisal);
    design.rows.push_back(std::move(row));
    design.response.push_back(r.uid_p);
  }
  return design;
}

RegressionResult ols_fit(const std::vector<std::vector<double>>& rows,
                         const std::vector<double>& response,
                         const std::vector<std::string>& column_names) {
  const std::size_t n = rows.size();
  const std::size_t p = column_names.size();
  if (n == 0 || p == 0) throw DataError("ols_fit: empty design");
  if (response.size() != n)
    throw DataError("ols_fit: " + std::to_string(n) + " rows but " +
                    std::to_string(response.size()) + " responses");
  if (n < p + 1)
    throw DataError("ols_fit: need at least " + std::to_string(p + 1) +
                    " rows for " + std::to_string(p) + " columns, have " +
                    std::to_string(n));
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != p)
      throw DataError("ols_fit: row " + std::to_string(i) + " has " +
                      std::to_string(rows[i].size()) + " columns");
    for (std::size_t j = 0; j < p; ++j) {
      if (!std::isfinite(rows[i][j]))
        throw DataError("ols_fit: non-finite design entry");
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
    if (!std::isfinite(response[i]))
      throw DataError("ols_fit: non-finite response");
    y(static_cast<Eigen::Index>(i)) = response[i];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  const auto rank = qr.rank();
  if (rank < static_cast<Eigen::Index>(p)) {
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = rank; i < static_cast<Eigen::Index>(p); ++i) {
      if (!names.empty()) names += ", ";
      names += column_names[static_cast<std::size_t>(perm[i])];
    }
    throw DataError("ols_fit: design is rank deficient; collinear columns: " +
                    names);
  }

  Eigen::VectorXd beta = qr.solve(y);
  Eigen::VectorXd residuals = y - X * beta;
  const double ssr = residuals.squaredNorm();
  const double dof = static_cast<double>(n - p);
  const double sigma2 = ssr / dof;

  Eigen::MatrixXd R = qr.matrixR()
                          .topLeftCorner(static_cast<Eigen::Index>(p),
                                         static_cast<Eigen::Index>(p))
                          .triangularView<Eigen::Upper>();
  Eigen::MatrixXd r_inv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(
          static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
  Eigen::MatrixXd cov_permuted = r_inv * r_inv.transpose();
  Eigen::MatrixXd cov = qr.colsPermutation() * cov_permuted *
                        qr.colsPermutation().transpose();
  cov *= sigma2;

  RegressionResult result;
  result.terms = column_names;
  result.n = n;
  for (std::size_t j = 0; j < p; ++j) {
    result.estimates.push_back(beta(static_cast<Eigen::Index>(j)));
    result.std_errors.push_back(
        std::sqrt(cov(static_cast<Eigen::Index>(j),
                      static_cast<Eigen::Index>(j))));
  }
  const double sst = (y.array() - y.mean()).square().sum();
  result.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
  return result;
}

RegressionResult fit_design(const Design& design) {
  RegressionResult result =
      ols_fit(design.rows, design.response, design.column_names);
  result.reference_variant = design.reference_variant;
  result.reference_size = design.reference_size;
  return result;
}

std::vector<std::pair<std::string, RegressionResult>> regress_by_language(
    const std::vector<RunRecord>& records,
    const std::string& reference_variant) {
  std::map<std::string, std::vector<RunRecord>> by_language;
  for (const auto& r : records) by_language[r.language].push_back(r);
  std::vector<std::pair<std::string, RegressionResult>> out;
  for (const auto& [language, rows] : by_language)
    out.emplace_back(language,
                     fit_design(treatment_encode(rows, reference_variant)));
  return out;
}

void write_coefficients_csv(
    std::ostream& out,
    const std::vector<std::pair<std::string, RegressionResult>>& fits) {
  out << "language,term,estimate,std_error\n";
  for (const auto& [language, fit] : fits)
    for (std::size_t j = 0; j < fit.terms.size(); ++j)
      out << language << ',' << fit.terms[j] << ','
          << format_double(fit.estimates[j]) << ','
          << format_double(fit.std_errors[j]) << "\n";
}

Report variant_report(const std::vector<RunRecord>& records,
                      const ReportOptions& options) {
  if (records.empty()) throw DataError("variant_report: no records");
  if (options.bootstrap_resamples < 1)
    throw ConfigError("bootstrap resamples must be >= 1");
  for (const auto& [a, b] : options.comparisons) {
    variant_from_string(a);
    variant_from_string(b);
  }
  std::map<std::pair<std::string, std::string>, std::vector<RunRecord>> groups;
  std::set<std::string> languages;
  for (const auto& r : records) {
    groups[{r.language, r.variant}].push_back(r);
    languages.insert(r.language);
  }
  Report report;
  for (const auto& language : languages) {
    for (Variant v : all_variants()) {
      auto it = groups.find({language, variant_name(v)});
      if (it == groups.end()) continue;
      for (const auto& [metric, field] : kMetricFields) {
        std::vector<double> values;
        for (const auto& r : it->second) values.push_back(r.*field);
        Interval ci = bootstrap_mean(
            values, options.bootstrap_resamples,
            options.bootstrap_seed ^
                fnv1a64(language + "|" + variant_name(v) + "|" + metric));
        GroupSummary row;
        row.language = language;
        row.variant = variant_name(v);
        row.metric = metric;
        row.mean = ci.mean;
        row.ci_low = ci.lo;
        row.ci_high = ci.hi;
        row.n = values.size();
        report.groups.push_back(std::move(row));
      }
    }
  }
  for (const auto& [first, second] : options.comparisons) {
    for (const auto& language : languages) {
      auto a = groups.find({language, first});
      auto b = groups.find({language, second});
      if (a == groups.end() || b == groups.end()) continue;
      std::map<std::pair<std::string, long long>, const RunRecord*> by_key;
      for (const auto& r : a->second) by_key[{r.dataset_size, r.seed}] = &r;
      for (const auto& [metric, field] : kMetricFields) {
        ComparisonRow row;
        row.language = language;
        row.metric = metric;
        row.first = first;
        row.second = second;
        std::size_t ties = 0;
        for (const auto& rb : b->second) {
          auto it = by_key.find({rb.dataset_size, rb.seed});
          if (it == by_key.end()) continue;
          ++row.n_pairs;
          double va = it->second->*field, vb = rb.*field;
          if (va < vb)
            ++row.first_lower;
          else if (va == vb)
            ++ties;
        }
        if (row.n_pairs == 0) continue;
        row.p_value =
            sign_test_p(row.first_lower, row.n_pairs - ties - row.first_lower);
        report.comparisons.push_back(std::move(row));
      }
    }
  }
  return report;
}

void write_report_csv(std::ostream& out, const Report& report) {
  out << "language,variant,metric,mean,ci_low,ci_high,n\n";
  for (const auto& g : report.groups)
    out << g.language << ',' << g.variant << ',' << g.metric << ','
        << format_double(g.mean) << ',' << format_double(g.ci_low) << ','
        << format_double(g.ci_high) << ',' << g.n << "\n";
}

void write_comparisons_csv(std::ostream& out, const Report& report) {
  out << "language,metric,first,second,n_pairs,first_lower,p_value\n";
  for (const auto& c : report.comparisons)
    out << c.language << ',' << c.metric << ',' << c.first << ',' << c.second
        << ',' << c.n_pairs << ',' << c.first_lower << ','
        << format_double(c.p_value) << "\n";
}

}  // namespace wordorder
