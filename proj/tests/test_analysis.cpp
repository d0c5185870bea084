#include "wordorder/analysis.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "wordorder/corpus.hpp"
#include "wordorder/errors.hpp"

using namespace wordorder;

namespace {

RunRecord run(std::string lang, std::string variant, std::string size,
              long long seed, double ms, double v, double lv, double p) {
  return RunRecord{std::move(lang), std::move(variant), std::move(size),
                   seed,            ms,                 v,
                   lv,              p};
}

// The full 14 x 3 x 2 grid with uid_p generated from planted coefficients.
std::vector<RunRecord> planted_grid(
    double intercept, double surprisal_slope,
    const std::vector<double>& variant_effects,
    const std::vector<double>& size_effects) {
  std::vector<std::string> sizes = {"20M", "6.6M", "3.3M"};
  std::vector<RunRecord> records;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> surprisal(5.0, 9.0);
  auto variants = all_variants();
  for (std::size_t vi = 0; vi < variants.size(); ++vi)
    for (std::size_t si = 0; si < sizes.size(); ++si)
      for (long long seed : {1, 2}) {
        double ms = surprisal(rng);
        double y = intercept + surprisal_slope * ms +
                   (vi > 0 ? variant_effects[vi - 1] : 0.0) +
                   (si > 0 ? size_effects[si - 1] : 0.0);
        records.push_back(run("toy", variant_name(variants[vi]), sizes[si],
                              seed, ms, 0.5, 1.0, y));
      }
  return records;
}

}  // namespace

TEST_CASE("run record csv round trips and validates") {
  std::vector<RunRecord> records = {
      run("fi", "Reverse", "6.6M", 2, 7.25, 1.5, 2.5, 12.0),
      run("en", "Real", "20M", 1, 6.5, 1.0, 2.0, 10.5),
  };
  std::ostringstream out;
  write_run_records(out, records);
  std::istringstream in(out.str());
  auto back = read_run_records(in);
  REQUIRE(back.size() == 2);
  // sorted on write
  CHECK(back[0].language == "en");
  CHECK(back[1] == records[0]);

  SUBCASE("header required") {
    std::istringstream bad("en,Real,20M,1,1,1,1,1\n");
    CHECK_THROWS_WITH_AS(read_run_records(bad), doctest::Contains("header"),
                         DataError);
  }
  SUBCASE("unknown variant tag") {
    std::istringstream bad(std::string(kRunRecordHeader) +
                           "\nen,Backwards,20M,1,1,1,1,1\n");
    CHECK_THROWS_AS(read_run_records(bad), ConfigError);
  }
  SUBCASE("field count") {
    std::istringstream bad(std::string(kRunRecordHeader) + "\nen,Real,20M,1\n");
    CHECK_THROWS_WITH_AS(read_run_records(bad), doctest::Contains("8 fields"),
                         DataError);
  }
  SUBCASE("non-finite metric") {
    std::istringstream bad(std::string(kRunRecordHeader) +
                           "\nen,Real,20M,1,inf,1,1,1\n");
    CHECK_THROWS_AS(read_run_records(bad), DataError);
  }
  SUBCASE("duplicate key") {
    std::istringstream bad(std::string(kRunRecordHeader) +
                           "\nen,Real,20M,1,1,1,1,1\nen,Real,20M,1,2,2,2,2\n");
    CHECK_THROWS_WITH_AS(read_run_records(bad), doctest::Contains("duplicate"),
                         DataError);
  }
}

TEST_CASE("upsert replaces matching runs") {
  std::vector<RunRecord> records = {run("en", "Real", "20M", 1, 1, 1, 1, 1)};
  upsert_run_record(records, run("en", "Real", "20M", 2, 2, 2, 2, 2));
  CHECK(records.size() == 2);
  upsert_run_record(records, run("en", "Real", "20M", 1, 9, 9, 9, 9));
  CHECK(records.size() == 2);
  CHECK(records[0].uid_p == 9.0);
}

TEST_CASE("dataset size labels parse with magnitude suffixes") {
  CHECK(*dataset_size_value("20M") == 2e7);
  CHECK(*dataset_size_value("6.6M") == doctest::Approx(6.6e6));
  CHECK(*dataset_size_value("3.3M") == doctest::Approx(3.3e6));
  CHECK(*dataset_size_value("10k") == 1e4);
  CHECK(*dataset_size_value("1.5B") == 1.5e9);
  CHECK(*dataset_size_value("1000") == 1000.0);
  CHECK(!dataset_size_value("big"));
  CHECK(!dataset_size_value("20Mx"));
}

TEST_CASE("treatment coding shapes") {
  SUBCASE("two variants give a single indicator") {
    std::vector<RunRecord> records = {
        run("en", "Real", "20M", 1, 6.0, 1, 1, 10.0),
        run("en", "Real", "20M", 2, 6.1, 1, 1, 10.1),
        run("en", "Reverse", "20M", 1, 6.2, 1, 1, 11.0),
        run("en", "Reverse", "20M", 2, 6.3, 1, 1, 11.1),
    };
    Design design = treatment_encode(records, "Real");
    REQUIRE(design.column_names.size() == 3);
    CHECK(design.column_names[0] == "(intercept)");
    CHECK(design.column_names[1] == "variant=Reverse");
    CHECK(design.column_names[2] == "mean_surprisal");
    CHECK(design.rows[2][1] == 1.0);
    CHECK(design.rows[0][1] == 0.0);
    CHECK(design.response[0] == 10.0);
    CHECK(design.reference_size == "20M");
  }
  SUBCASE("full grid gives 13 variant and 2 size columns") {
    auto records = planted_grid(2.0, 0.5, std::vector<double>(13, 1.0),
                                {0.25, 0.5});
    Design design = treatment_encode(records, "Real");
    // intercept + 13 + 2 + mean_surprisal
    REQUIRE(design.column_names.size() == 17);
    int variant_cols = 0, size_cols = 0;
    for (const auto& name : design.column_names) {
      if (name.rfind("variant=", 0) == 0) ++variant_cols;
      if (name.rfind("size=", 0) == 0) ++size_cols;
    }
    CHECK(variant_cols == 13);
    CHECK(size_cols == 2);
    CHECK(design.reference_size == "20M");
    CHECK(design.column_names[14] == "size=6.6M");
    CHECK(design.column_names[15] == "size=3.3M");
    for (const auto& name : design.column_names)
      CHECK(name != "variant=Real");
    CHECK(design.rows.size() == 84);
  }
  SUBCASE("single variant yields no indicators") {
    std::vector<RunRecord> records = {
        run("en", "Real", "20M", 1, 6.0, 1, 1, 10.0),
        run("en", "Real", "20M", 2, 6.5, 1, 1, 10.2),
    };
    Design design = treatment_encode(records, "Real");
    REQUIRE(design.column_names.size() == 2);
    CHECK(design.column_names[1] == "mean_surprisal");
  }
  SUBCASE("missing reference") {
    std::vector<RunRecord> records = {
        run("en", "Reverse", "20M", 1, 6.0, 1, 1, 10.0)};
    CHECK_THROWS_AS(treatment_encode(records, "Real"), ConfigError);
    CHECK_THROWS_AS(treatment_encode(records, "NotATag"), ConfigError);
  }
}

TEST_CASE("ols recovers exact linear data") {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (double x : {0.0, 1.0, 2.0, 3.0, 4.0}) {
    rows.push_back({1.0, x});
    y.push_back(3.0 + 2.0 * x);
  }
  auto fit = ols_fit(rows, y, {"(intercept)", "x"});
  CHECK(fit.estimates[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fit.estimates[1] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit.std_errors[0] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  // shifting y moves only the intercept
  std::vector<double> shifted = y;
  for (double& v : shifted) v += 11.0;
  auto fit2 = ols_fit(rows, shifted, {"(intercept)", "x"});
  CHECK(fit2.estimates[0] == doctest::Approx(14.0).epsilon(1e-8));
  CHECK(fit2.estimates[1] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("ols two-group difference equals the group coefficient") {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (double v : {1.0, 2.0, 3.0}) {
    rows.push_back({1.0, 0.0});
    y.push_back(v);
  }
  for (double v : {2.0, 3.0, 4.0}) {
    rows.push_back({1.0, 1.0});
    y.push_back(v);
  }
  auto fit = ols_fit(rows, y, {"(intercept)", "group"});
  CHECK(fit.estimates[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("ols standard errors match a reference computation") {
  std::vector<std::vector<double>> rows = {
      {1, 0, 0.5}, {1, 0, 1.0}, {1, 0, 2.0}, {1, 0, 3.5},
      {1, 1, 0.5}, {1, 1, 2.5}, {1, 1, 3.0}, {1, 1, 4.0}};
  std::vector<double> y = {1.0, 2.2, 2.9, 4.1, 3.0, 5.6, 5.1, 7.0};
  auto fit = ols_fit(rows, y, {"(intercept)", "g", "x"});
  CHECK(fit.estimates[0] == doctest::Approx(0.755319148936173).epsilon(1e-9));
  CHECK(fit.estimates[1] == doctest::Approx(1.855851063829788).epsilon(1e-9));
  CHECK(fit.estimates[2] == doctest::Approx(1.025531914893617).epsilon(1e-9));
  CHECK(fit.std_errors[0] == doctest::Approx(0.309812367463029).epsilon(1e-9));
  CHECK(fit.std_errors[1] == doctest::Approx(0.320908888491016).epsilon(1e-9));
  CHECK(fit.std_errors[2] == doctest::Approx(0.126480369381344).epsilon(1e-9));
  CHECK(fit.r_squared == doctest::Approx(0.965292326066310).epsilon(1e-9));
}

TEST_CASE("ols rejects degenerate designs") {
  std::vector<std::vector<double>> rows = {
      {1, 2, 2}, {1, 3, 3}, {1, 4, 4}, {1, 5, 5}};
  std::vector<double> y = {1, 2, 3, 4};
  CHECK_THROWS_WITH_AS(ols_fit(rows, y, {"(intercept)", "a", "b"}),
                       doctest::Contains("collinear"), DataError);
  CHECK_THROWS_WITH_AS(
      ols_fit({{1.0}, {1.0, 2.0}, {1.0, 3.0}}, {1.0, 2.0, 3.0},
              {"(intercept)", "x"}),
      doctest::Contains("row 0"), DataError);
  CHECK_THROWS_WITH_AS(ols_fit({{1.0, 2.0}}, {1.0}, {"(intercept)", "x"}),
                       doctest::Contains("at least"), DataError);
}

TEST_CASE("planted coefficients are recovered through the full encoding") {
  std::vector<double> variant_effects;
  for (int i = 0; i < 13; ++i)
    variant_effects.push_back(0.5 * (i + 1) * (i % 2 == 0 ? 1.0 : -1.0));
  std::vector<double> size_effects = {0.75, -1.25};
  auto records = planted_grid(4.0, 0.6, variant_effects, size_effects);
  auto fits = regress_by_language(records, "Real");
  REQUIRE(fits.size() == 1);
  const auto& fit = fits[0].second;
  CHECK(fits[0].first == "toy");
  CHECK(fit.n == 84);
  CHECK(fit.reference_variant == "Real");
  CHECK(fit.reference_size == "20M");
  REQUIRE(fit.terms.size() == 17);
  CHECK(fit.estimates[0] == doctest::Approx(4.0).epsilon(1e-8));
  auto variants = all_variants();
  for (int i = 0; i < 13; ++i) {
    CHECK(fit.terms[1 + i] ==
          "variant=" + variant_name(variants[static_cast<std::size_t>(i) + 1]));
    CHECK(fit.estimates[1 + static_cast<std::size_t>(i)] ==
          doctest::Approx(variant_effects[static_cast<std::size_t>(i)])
              .epsilon(1e-8));
  }
  CHECK(fit.estimates[14] == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(fit.estimates[15] == doctest::Approx(-1.25).epsilon(1e-8));
  CHECK(fit.estimates[16] == doctest::Approx(0.6).epsilon(1e-8));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-10));

  std::ostringstream csv;
  write_coefficients_csv(csv, fits);
  CHECK(csv.str().rfind("language,term,estimate,std_error\n", 0) == 0);
  CHECK(csv.str().find("toy,variant=Reverse,") != std::string::npos);
}

TEST_CASE("variant report summarizes groups and runs sign tests") {
  std::vector<RunRecord> records;
  // 10 languages; Real uid_v below Reverse in 8 of them.
  for (int i = 0; i < 10; ++i) {
    std::string lang = "l" + std::to_string(i);
    double real_v = 1.0, reverse_v = (i < 8) ? 2.0 : 0.5;
    for (long long seed : {1, 2}) {
      records.push_back(
          run(lang, "Real", "10k", seed, 6.0, real_v, 1.0, 8.0));
      records.push_back(
          run(lang, "Reverse", "10k", seed, 6.5, reverse_v, 1.5, 9.0));
    }
  }
  ReportOptions options;
  options.comparisons = {{"Real", "Reverse"}};
  Report report = variant_report(records, options);
  // 10 languages x 2 variants x 4 metrics
  CHECK(report.groups.size() == 80);
  int flagged_lower = 0;
  for (const auto& c : report.comparisons) {
    CHECK(c.n_pairs == 2);
    if (c.metric == "uid_v" && c.first_lower == 2) ++flagged_lower;
  }
  CHECK(flagged_lower == 8);
  // 10 languages x 4 metrics
  CHECK(report.comparisons.size() == 40);

  // deterministic given the seed
  Report again = variant_report(records, options);
  for (std::size_t i = 0; i < report.groups.size(); ++i) {
    CHECK(report.groups[i].ci_low == again.groups[i].ci_low);
    CHECK(report.groups[i].ci_high == again.groups[i].ci_high);
  }

  std::ostringstream csv;
  write_report_csv(csv, report);
  CHECK(csv.str().find("l0,Real,uid_v,") != std::string::npos);
  std::ostringstream ccsv;
  write_comparisons_csv(ccsv, report);
  CHECK(ccsv.str().find("l0,uid_v,Real,Reverse,2,2,") != std::string::npos);
}

TEST_CASE("single-run groups collapse their interval") {
  std::vector<RunRecord> records = {run("en", "Real", "10k", 1, 6, 1, 2, 8)};
  Report report = variant_report(records, ReportOptions{});
  REQUIRE(report.groups.size() == 4);
  for (const auto& g : report.groups) {
    CHECK(g.n == 1);
    CHECK(g.ci_low == g.mean);
    CHECK(g.ci_high == g.mean);
  }
  CHECK(report.comparisons.empty());
}

TEST_CASE("comparison pairs need both variants") {
  std::vector<RunRecord> records = {
      run("en", "Real", "10k", 1, 6, 1, 2, 8),
      run("fi", "Real", "10k", 1, 6, 1, 2, 8),
      run("fi", "Reverse", "10k", 1, 7, 2, 3, 9),
  };
  ReportOptions options;
  options.comparisons = {{"Real", "Reverse"}};
  Report report = variant_report(records, options);
  for (const auto& c : report.comparisons) CHECK(c.language == "fi");
  CHECK(report.comparisons.size() == 4);
  ReportOptions bad;
  bad.comparisons = {{"Real", "Junk"}};
  CHECK_THROWS_AS(variant_report(records, bad), ConfigError);
}
