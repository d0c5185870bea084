#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wordorder/corpus.hpp"
#include "wordorder/surprisal.hpp"

namespace wordorder {

enum class Smoothing { MLE, AddAlpha, InterpolatedKN };

std::string smoothing_name(Smoothing s);
Smoothing smoothing_from_string(const std::string& name);

struct NGramConfig {
  int order = 4;
  Smoothing smoothing = Smoothing::InterpolatedKN;
  double discount = 0.75;   // interpolated-kn
  double alpha = 1.0;       // add-alpha
  int unk_min_count = 2;    // train counts below this map to UNK

  void validate() const;  // throws ConfigError
};

// Reserved event/context ids. BOS only ever appears in contexts.
inline constexpr std::uint32_t kUnkId = 0;
inline constexpr std::uint32_t kEosId = 1;
inline constexpr std::uint32_t kBosId = 2;

// Count-based LM over word events plus EOS. Contexts run across sentence
// boundaries within a document; each document starts from (order-1) BOS.
class NGramModel {
 public:
  struct ContextStat {
    std::uint64_t total = 0;
    std::uint32_t distinct = 0;
  };
  using PairCounts = std::unordered_map<std::string, std::uint64_t>;
  using ContextCounts = std::unordered_map<std::string, ContextStat>;

  const NGramConfig& config() const { return config_; }
  // Number of predictable events: vocabulary words + UNK + EOS.
  std::size_t event_count() const { return id_to_word_.size() - 1; }
  std::uint32_t word_id(const std::string& word) const;
  const std::string& word_for_id(std::uint32_t id) const;

  // p(event | last order-1 ids of context), with the smoothing configured
  // at training time. Throws DataError for an MLE zero-probability event.
  double probability(const std::vector<std::uint32_t>& context,
                     std::uint32_t event) const;
  double surprisal_bits(const std::vector<std::uint32_t>& context,
                        std::uint32_t event) const;

  // Binary serialization. `annotation` is a free-form string stored in the
  // header (provenance, config hash); load returns it via the out param.
  void save(std::ostream& out, const std::string& annotation = "") const;
  static NGramModel load(std::istream& in, std::string* annotation = nullptr);

 private:
  friend class NGramTrainer;
  friend void derive_continuation(NGramModel& model);

  double order_probability(int k, const std::uint32_t* context,
                           std::uint32_t event) const;

  NGramConfig config_;
  std::vector<std::string> id_to_word_;  // index = id; [kBosId] is a marker
  std::unordered_map<std::string, std::uint32_t> word_to_id_;
  // raw_[k-1]: windows of length k. cont_[k-1]: continuation counts used
  // below the top order.
  std::vector<PairCounts> raw_pairs_;
  std::vector<ContextCounts> raw_ctx_;
  std::vector<PairCounts> cont_pairs_;
  std::vector<ContextCounts> cont_ctx_;
};

// Two-pass trainer: feed every record to count_vocab, call finish_vocab,
// feed the same records in the same order to count_ngrams, call finish.
class NGramTrainer {
 public:
  explicit NGramTrainer(NGramConfig config);

  void count_vocab(const SentenceRecord& record);
  void finish_vocab();
  void count_ngrams(const SentenceRecord& record);
  NGramModel finish();

 private:
  void add_event(std::uint32_t event);

  NGramConfig config_;
  bool vocab_done_ = false;
  std::unordered_map<std::string, std::uint64_t> word_counts_;
  NGramModel model_;
  std::vector<std::uint32_t> context_;  // rolling, length order-1
  std::string current_doc_;
  bool in_doc_ = false;
  std::unordered_set<std::uint64_t> finished_docs_;
  std::uint64_t events_seen_ = 0;
};

// Scores records document by document, carrying context across sentences.
// Records must arrive grouped by document; a document reappearing after
// another throws DataError.
class ScoreSession {
 public:
  explicit ScoreSession(const NGramModel& model);
  SurprisalRecord score(const SentenceRecord& record);

 private:
  const NGramModel& model_;
  std::vector<std::uint32_t> context_;
  std::string current_doc_;
  bool in_doc_ = false;
  int last_sent_idx_ = -1;
  std::unordered_set<std::uint64_t> finished_docs_;
};

// Convenience wrappers over the trainer/session for in-memory corpora.
NGramModel train_ngram(const std::vector<SentenceRecord>& records,
                       const NGramConfig& config);
std::vector<SurprisalRecord> score_records(
    const NGramModel& model, const std::vector<SentenceRecord>& records);

}  // namespace wordorder
