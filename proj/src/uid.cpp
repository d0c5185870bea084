#include "wordorder/uid.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wordorder/errors.hpp"
#include "wordorder/util.hpp"

namespace wordorder {

std::string sentence_filter_name(SentenceFilter f) {
  return f == SentenceFilter::All ? "all" : "document-initial";
}

SentenceFilter sentence_filter_from_string(const std::string& name) {
  if (name == "all") return SentenceFilter::All;
  if (name == "document-initial") return SentenceFilter::DocumentInitial;
  throw ConfigError("unknown sentence filter '" + name +
                    "' (expected all or document-initial)");
}

void MetricConfig::validate() const {
  if (!(k > 1.0)) throw ConfigError("uid_p exponent k must be > 1");
  if (bootstrap_resamples < 1)
    throw ConfigError("bootstrap resamples must be >= 1");
}

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::UidV: return "uid_v";
    case Metric::UidLv: return "uid_lv";
    case Metric::UidP: return "uid_p";
  }
  return "?";
}

Metric metric_from_string(const std::string& name) {
  if (name == "uid_v") return Metric::UidV;
  if (name == "uid_lv") return Metric::UidLv;
  if (name == "uid_p") return Metric::UidP;
  throw ConfigError("unknown metric '" + name +
                    "' (expected uid_v, uid_lv, or uid_p)");
}

double uid_v(const std::vector<double>& surprisals) {
  if (surprisals.empty()) throw DataError("uid_v of an empty sentence");
  const double mu = mean(surprisals);
  std::vector<double> sq;
  sq.reserve(surprisals.size());
  for (double s : surprisals) sq.push_back((s - mu) * (s - mu));
  return mean(sq);
}

double uid_lv(const std::vector<double>& surprisals) {
  if (surprisals.size() < 2)
    throw DataError("uid_lv needs at least 2 words, got " +
                    std::to_string(surprisals.size()));
  std::vector<double> sq;
  sq.reserve(surprisals.size() - 1);
  for (std::size_t i = 1; i < surprisals.size(); ++i) {
    double d = surprisals[i] - surprisals[i - 1];
    sq.push_back(d * d);
  }
  return mean(sq);
}

double uid_p(const std::vector<double>& surprisals, double k) {
  if (surprisals.empty()) throw DataError("uid_p of an empty sentence");
  if (!(k > 1.0)) throw ConfigError("uid_p exponent k must be > 1");
  std::vector<double> powered;
  powered.reserve(surprisals.size());
  for (double s : surprisals) powered.push_back(std::pow(s, k));
  return mean(powered);
}

LanguageEstimate language_uid(const std::vector<SurprisalRecord>& records,
                              Metric metric, const MetricConfig& config) {
  config.validate();
  LanguageEstimate out;
  out.metric = metric_name(metric);
  std::vector<double> scores;
  for (const auto& record : records) {
    if (config.filter == SentenceFilter::DocumentInitial &&
        record.sent_idx != 0)
      continue;
    if (metric == Metric::UidLv && record.surprisals.size() < 2) {
      ++out.skipped;
      continue;
    }
    switch (metric) {
      case Metric::UidV: scores.push_back(uid_v(record.surprisals)); break;
      case Metric::UidLv: scores.push_back(uid_lv(record.surprisals)); break;
      case Metric::UidP:
        scores.push_back(uid_p(record.surprisals, config.k));
        break;
    }
  }
  if (scores.empty())
    throw DataError("no sentences left for " + out.metric + " with filter " +
                    sentence_filter_name(config.filter));
  out.n_sentences = scores.size();
  out.estimate = mean(scores);
  const std::size_t n = scores.size();
  if (config.ci_method == CIMethod::Normal) {
    double half = 0.0;
    if (n > 1) {
      std::vector<double> sq;
      sq.reserve(n);
      for (double s : scores)
        sq.push_back((s - out.estimate) * (s - out.estimate));
      double sd = std::sqrt(pairwise_sum(sq) / static_cast<double>(n - 1));
      half = 1.959963984540054 * sd / std::sqrt(static_cast<double>(n));
    }
    out.ci_low = out.estimate - half;
    out.ci_high = out.estimate + half;
  } else {
    std::mt19937_64 rng(config.bootstrap_seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(config.bootstrap_resamples));
    std::vector<double> resample(n);
    for (int b = 0; b < config.bootstrap_resamples; ++b) {
      for (std::size_t i = 0; i < n; ++i) resample[i] = scores[pick(rng)];
      means.push_back(mean(resample));
    }
    std::sort(means.begin(), means.end());
    const std::size_t count = means.size();
    auto quantile = [&](double q) {
      auto rank = static_cast<std::size_t>(
          std::ceil(q * static_cast<double>(count)));
      if (rank > 0) --rank;
      return means[std::min(rank, count - 1)];
    };
    out.ci_low = quantile(0.025);
    out.ci_high = quantile(0.975);
  }
  // CI is defined to contain the point estimate.
  out.ci_low = std::min(out.ci_low, out.estimate);
  out.ci_high = std::max(out.ci_high, out.estimate);
  return out;
}

double mean_surprisal(const std::vector<SurprisalRecord>& records,
                      Granularity granularity) {
  if (records.empty()) throw DataError("mean_surprisal of an empty stream");
  if (granularity == Granularity::PerWord) {
    std::vector<double> totals;
    std::size_t words = 0;
    for (const auto& record : records) {
      if (record.surprisals.empty())
        throw DataError("sentence without surprisals in document '" +
                        record.doc_id + "'");
      totals.push_back(pairwise_sum(record.surprisals));
      words += record.surprisals.size();
    }
    return pairwise_sum(totals) / static_cast<double>(words);
  }
  std::vector<double> totals;
  totals.reserve(records.size());
  for (const auto& record : records) {
    double total = pairwise_sum(record.surprisals);
    if (record.eos_surprisal) total += *record.eos_surprisal;
    totals.push_back(total);
  }
  return mean(totals);
}

}  // namespace wordorder
