#include "wordorder/uid.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "wordorder/errors.hpp"
#include "wordorder/finite_language.hpp"

using namespace wordorder;

namespace {

SurprisalRecord srec(std::string doc, int idx, std::vector<double> s,
                     std::optional<double> eos = std::nullopt) {
  SurprisalRecord r;
  r.doc_id = std::move(doc);
  r.sent_idx = idx;
  r.surprisals = std::move(s);
  r.eos_surprisal = eos;
  return r;
}

}  // namespace

TEST_CASE("uid_v matches hand-computed variances") {
  CHECK(uid_v({2.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(uid_v({1.0, 3.0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(uid_v({7.5, 7.5, 7.5}) == 0.0);
  CHECK(uid_v({5.0}) == 0.0);
  CHECK_THROWS_AS(uid_v({}), DataError);
}

TEST_CASE("uid_lv averages squared successive differences") {
  CHECK(uid_lv({2.0, 0.0}) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(uid_lv({1.0, 3.0, 1.0}) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(uid_lv({3.0, 3.0, 3.0}) == 0.0);
  CHECK_THROWS_AS(uid_lv({1.0}), DataError);
  CHECK_THROWS_AS(uid_lv({}), DataError);
}

TEST_CASE("uid_p is the mean k-th power") {
  CHECK(uid_p({1.0, 1.0}, 1.25) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(uid_p({0.0, 0.0}, 3.0) == 0.0);
  CHECK(uid_p({4.0}, 1.25) ==
        doctest::Approx(std::pow(4.0, 1.25)).epsilon(1e-12));
  CHECK(uid_p({4.0}, 1.25) == doctest::Approx(5.6569).epsilon(1e-4));
  CHECK_THROWS_AS(uid_p({}, 1.25), DataError);
  CHECK_THROWS_AS(uid_p({1.0}, 1.0), ConfigError);
}

TEST_CASE("sorted order minimizes uid_lv") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> value(0.0, 8.0);
  for (int n = 2; n <= 6; ++n) {
    for (int trial = 0; trial < 25; ++trial) {
      std::vector<double> sorted;
      for (int i = 0; i < n; ++i) sorted.push_back(value(rng));
      std::sort(sorted.begin(), sorted.end());
      double best = uid_lv(sorted);
      std::vector<double> perm = sorted;
      do {
        CHECK(uid_lv(perm) >= best - 1e-12);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
}

TEST_CASE("shift and permutation behavior") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> value(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s;
    int n = 2 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) s.push_back(value(rng));
    std::vector<double> shifted = s;
    for (double& v : shifted) v += 2.5;
    CHECK(uid_v(shifted) == doctest::Approx(uid_v(s)).epsilon(1e-9));
    CHECK(uid_lv(shifted) == doctest::Approx(uid_lv(s)).epsilon(1e-9));
    std::vector<double> shuffled = s;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(uid_v(shuffled) == doctest::Approx(uid_v(s)).epsilon(1e-9));
    CHECK(uid_v(s) >= 0.0);
    CHECK(uid_lv(s) >= 0.0);
    CHECK(uid_p(s, 1.25) >= 0.0);
  }
  // uid_p is not shift-invariant
  CHECK(uid_p({1.0, 3.0}, 2.0) != uid_p({2.0, 4.0}, 2.0));
  // uid_lv is order-sensitive
  CHECK(uid_lv({0.0, 10.0, 0.0, 10.0}) != uid_lv({0.0, 0.0, 10.0, 10.0}));
}

TEST_CASE("language_uid averages sentence scores") {
  // uid_v of [2,0] is 1; of [2*sqrt(3), 0] is 3.
  std::vector<SurprisalRecord> records = {
      srec("d0", 0, {2.0, 0.0}),
      srec("d1", 0, {2.0 * std::sqrt(3.0), 0.0}),
  };
  MetricConfig config;
  auto estimate = language_uid(records, Metric::UidV, config);
  CHECK(estimate.estimate == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(estimate.n_sentences == 2);
  CHECK(estimate.metric == "uid_v");
  CHECK(estimate.ci_low <= estimate.estimate);
  CHECK(estimate.ci_high >= estimate.estimate);
}

TEST_CASE("bootstrap interval is seeded and collapses for one sentence") {
  std::vector<SurprisalRecord> one = {srec("d0", 0, {1.0, 2.0, 3.0})};
  MetricConfig config;
  auto estimate = language_uid(one, Metric::UidV, config);
  CHECK(estimate.ci_low == estimate.estimate);
  CHECK(estimate.ci_high == estimate.estimate);

  std::mt19937_64 rng(47);
  std::vector<SurprisalRecord> many;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> s = {double(rng() % 7), double(rng() % 7),
                             double(rng() % 7)};
    many.push_back(srec("d" + std::to_string(i), 0, s));
  }
  auto a = language_uid(many, Metric::UidLv, config);
  auto b = language_uid(many, Metric::UidLv, config);
  CHECK(a.ci_low == b.ci_low);
  CHECK(a.ci_high == b.ci_high);
  CHECK(a.ci_low < a.ci_high);
  MetricConfig other = config;
  other.bootstrap_seed = 999;
  auto c = language_uid(many, Metric::UidLv, other);
  CHECK((c.ci_low != a.ci_low || c.ci_high != a.ci_high));

  MetricConfig normal = config;
  normal.ci_method = CIMethod::Normal;
  auto d = language_uid(many, Metric::UidLv, normal);
  CHECK(d.estimate == a.estimate);
  CHECK(d.ci_low < d.estimate);
  CHECK(d.ci_high > d.estimate);
  auto e = language_uid(one, Metric::UidV, normal);
  CHECK(e.ci_low == e.estimate);
  CHECK(e.ci_high == e.estimate);
}

TEST_CASE("document-initial filter keeps sent_idx zero") {
  std::vector<SurprisalRecord> records = {
      srec("d0", 0, {2.0, 0.0}),          // uid_v 1
      srec("d0", 1, {9.0, 9.0}),          // uid_v 0, filtered out
      srec("d1", 0, {2.0, 0.0}),
  };
  MetricConfig config;
  config.filter = SentenceFilter::DocumentInitial;
  auto filtered = language_uid(records, Metric::UidV, config);
  CHECK(filtered.estimate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(filtered.n_sentences == 2);

  // A corpus of only document-initial sentences is unchanged by the filter.
  std::vector<SurprisalRecord> initial_only = {records[0], records[2]};
  MetricConfig all = config;
  all.filter = SentenceFilter::All;
  auto with = language_uid(initial_only, Metric::UidV, config);
  auto without = language_uid(initial_only, Metric::UidV, all);
  CHECK(with.estimate == without.estimate);
  CHECK(with.ci_low == without.ci_low);
  CHECK(with.ci_high == without.ci_high);

  std::vector<SurprisalRecord> later_only = {records[1]};
  CHECK_THROWS_AS(language_uid(later_only, Metric::UidV, config), DataError);
}

TEST_CASE("uid_lv skips and counts one-word sentences") {
  std::vector<SurprisalRecord> records = {
      srec("d0", 0, {2.0, 0.0}),  // lv 4
      srec("d0", 1, {5.0}),       // skipped
      srec("d1", 0, {1.0, 3.0}),  // lv 4
  };
  auto estimate = language_uid(records, Metric::UidLv, MetricConfig{});
  CHECK(estimate.estimate == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(estimate.n_sentences == 2);
  CHECK(estimate.skipped == 1);
  // but uid_v keeps them
  auto v = language_uid(records, Metric::UidV, MetricConfig{});
  CHECK(v.n_sentences == 3);
  CHECK(v.skipped == 0);
}

TEST_CASE("metrics ignore eos surprisal entirely") {
  std::mt19937_64 rng(53);
  std::vector<SurprisalRecord> bare, injected;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> s;
    int n = 2 + static_cast<int>(rng() % 5);
    for (int j = 0; j < n; ++j) s.push_back(double(rng() % 11));
    bare.push_back(srec("d" + std::to_string(i), 0, s));
    injected.push_back(
        srec("d" + std::to_string(i), 0, s, double(rng() % 1000)));
  }
  MetricConfig config;
  for (Metric metric : {Metric::UidV, Metric::UidLv, Metric::UidP}) {
    auto a = language_uid(bare, metric, config);
    auto b = language_uid(injected, metric, config);
    CHECK(a.estimate == b.estimate);
    CHECK(a.ci_low == b.ci_low);
    CHECK(a.ci_high == b.ci_high);
  }
  CHECK(mean_surprisal(bare, Granularity::PerWord) ==
        mean_surprisal(injected, Granularity::PerWord));
}

TEST_CASE("mean surprisal granularities") {
  std::vector<SurprisalRecord> records = {
      srec("d0", 0, {1.0, 1.0}, 1.0),
      srec("d1", 0, {2.0, 2.0}, 2.0),
  };
  CHECK(mean_surprisal(records, Granularity::PerWord) ==
        doctest::Approx(1.5).epsilon(1e-12));
  CHECK(mean_surprisal(records, Granularity::PerSentence) ==
        doctest::Approx(4.5).epsilon(1e-12));
  CHECK(mean_surprisal({srec("d0", 0, {3.0})}, Granularity::PerWord) == 3.0);
  CHECK_THROWS_AS(mean_surprisal({}, Granularity::PerWord), DataError);
}

TEST_CASE("toy language and its reverse share mean surprisal but not uid") {
  FiniteLanguage forward(
      {{"a", "w"}, {"a", "x"}, {"b", "y"}, {"b", "z"}},
      {0.25, 0.25, 0.25, 0.25});
  auto backward = transform_language(forward, [](const UnitString& s) {
    return UnitString(s.rbegin(), s.rend());
  });
  auto oracle_records = [](const FiniteLanguage& l) {
    std::vector<SurprisalRecord> out;
    for (std::size_t i = 0; i < l.size(); ++i) {
      auto s = exact_unit_surprisals(l, l.strings()[i]);
      SurprisalRecord r;
      r.doc_id = "d" + std::to_string(i);
      r.sent_idx = 0;
      r.eos_surprisal = s.back();
      s.pop_back();
      r.surprisals = std::move(s);
      out.push_back(r);
    }
    return out;
  };
  auto f = oracle_records(forward);
  auto b = oracle_records(backward);
  CHECK(std::abs(mean_surprisal(f, Granularity::PerSentence) - 2.0) <= 1e-9);
  CHECK(std::abs(mean_surprisal(b, Granularity::PerSentence) - 2.0) <= 1e-9);

  MetricConfig config;
  auto uniform = language_uid(f, Metric::UidV, config);
  auto bursty = language_uid(b, Metric::UidV, config);
  CHECK(uniform.estimate == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bursty.estimate == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("metric names and config validation") {
  CHECK(metric_name(Metric::UidP) == "uid_p");
  CHECK(metric_from_string("uid_lv") == Metric::UidLv);
  CHECK_THROWS_AS(metric_from_string("uidv"), ConfigError);
  CHECK(sentence_filter_from_string("document-initial") ==
        SentenceFilter::DocumentInitial);
  CHECK_THROWS_AS(sentence_filter_from_string("first"), ConfigError);
  MetricConfig bad;
  bad.k = 1.0;
  CHECK_THROWS_AS(language_uid({srec("d0", 0, {1.0})}, Metric::UidV, bad),
                  ConfigError);
  MetricConfig zero;
  zero.bootstrap_resamples = 0;
  CHECK_THROWS_AS(language_uid({srec("d0", 0, {1.0})}, Metric::UidV, zero),
                  ConfigError);
}
