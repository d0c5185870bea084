#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wordorder/surprisal.hpp"

namespace wordorder {

enum class SentenceFilter { All, DocumentInitial };
enum class CIMethod { Bootstrap, Normal };

std::string sentence_filter_name(SentenceFilter f);
SentenceFilter sentence_filter_from_string(const std::string& name);

struct MetricConfig {
  double k = 1.25;  // uid_p exponent
  SentenceFilter filter = SentenceFilter::All;
  CIMethod ci_method = CIMethod::Bootstrap;
  int bootstrap_resamples = 2000;
  std::uint64_t bootstrap_seed = 2024;

  void validate() const;  // throws ConfigError
};

enum class Metric { UidV, UidLv, UidP };

std::string metric_name(Metric m);
Metric metric_from_string(const std::string& name);

// Sentence-level scores over word surprisals (EOS always excluded).
double uid_v(const std::vector<double>& surprisals);            // bits^2
double uid_lv(const std::vector<double>& surprisals);           // bits^2
double uid_p(const std::vector<double>& surprisals, double k);  // bits^k

struct LanguageEstimate {
  std::string metric;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_sentences = 0;
  std::size_t skipped = 0;  // length-1 sentences dropped by uid_lv
};

// Unweighted mean of sentence-level scores with a seeded 95% CI.
LanguageEstimate language_uid(const std::vector<SurprisalRecord>& records,
                              Metric metric, const MetricConfig& config);

enum class Granularity { PerWord, PerSentence };

// Per-word: total word surprisal over word count, EOS excluded.
// Per-sentence: mean of sentence totals, EOS included where present.
double mean_surprisal(const std::vector<SurprisalRecord>& records,
                      Granularity granularity);

}  // namespace wordorder
