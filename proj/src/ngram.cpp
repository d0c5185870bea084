#include "wordorder/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>

#include "wordorder/errors.hpp"
#include "wordorder/util.hpp"

namespace wordorder {

namespace {

constexpr char kMagic[4] = {'W', 'O', 'L', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

void append_id(std::string& key, std::uint32_t id) {
  char bytes[4];
  std::memcpy(bytes, &id, 4);
  key.append(bytes, 4);
}

std::uint32_t id_at(const std::string& key, std::size_t offset) {
  std::uint32_t id = 0;
  std::memcpy(&id, key.data() + offset, 4);
  return id;
}

// Key over the last `len` ids of `context`.
std::string context_key(const std::vector<std::uint32_t>& context, int len) {
  std::string key;
  key.reserve(4 * static_cast<std::size_t>(len));
  for (std::size_t i = context.size() - static_cast<std::size_t>(len);
       i < context.size(); ++i)
    append_id(key, context[i]);
  return key;
}

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("model file truncated");
  return value;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  auto len = read_pod<std::uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw DataError("model file truncated");
  return s;
}

}  // namespace

std::string smoothing_name(Smoothing s) {
  switch (s) {
    case Smoothing::MLE: return "mle";
    case Smoothing::AddAlpha: return "add-alpha";
    case Smoothing::InterpolatedKN: return "interpolated-kn";
  }
  return "?";
}

Smoothing smoothing_from_string(const std::string& name) {
  if (name == "mle") return Smoothing::MLE;
  if (name == "add-alpha") return Smoothing::AddAlpha;
  if (name == "interpolated-kn") return Smoothing::InterpolatedKN;
  throw ConfigError("unknown smoothing '" + name +
                    "' (expected mle, add-alpha, or interpolated-kn)");
}

void NGramConfig::validate() const {
  if (order < 1) throw ConfigError("ngram order must be >= 1");
  if (smoothing == Smoothing::InterpolatedKN &&
      !(discount > 0.0 && discount <= 1.0))
    throw ConfigError("discount must lie in (0, 1]");
  if (smoothing == Smoothing::AddAlpha && !(alpha > 0.0))
    throw ConfigError("alpha must be positive");
  if (unk_min_count < 0) throw ConfigError("unk-min-count must be >= 0");
}

std::uint32_t NGramModel::word_id(const std::string& word) const {
  auto it = word_to_id_.find(word);
  return it == word_to_id_.end() ? kUnkId : it->second;
}

const std::string& NGramModel::word_for_id(std::uint32_t id) const {
  return id_to_word_.at(id);
}

double NGramModel::order_probability(int k, const std::uint32_t* context_end,
                                     std::uint32_t event) const {
  const double base = 1.0 / static_cast<double>(event_count());
  if (k == 0) return base;
  const bool top = (k == config_.order);
  const PairCounts& pairs = top ? raw_pairs_[k - 1] : cont_pairs_[k - 1];
  const ContextCounts& contexts = top ? raw_ctx_[k - 1] : cont_ctx_[k - 1];
  std::string ckey;
  ckey.reserve(4 * static_cast<std::size_t>(k - 1));
  for (const std::uint32_t* p = context_end - (k - 1); p != context_end; ++p)
    append_id(ckey, *p);
  auto cit = contexts.find(ckey);
  if (cit == contexts.end() || cit->second.total == 0)
    return order_probability(k - 1, context_end, event);
  const double total = static_cast<double>(cit->second.total);
  const double d = config_.discount;
  double count = 0.0;
  append_id(ckey, event);
  auto pit = pairs.find(ckey);
  if (pit != pairs.end()) count = static_cast<double>(pit->second);
  const double held_out = d * static_cast<double>(cit->second.distinct) / total;
  return std::max(count - d, 0.0) / total +
         held_out * order_probability(k - 1, context_end, event);
}

double NGramModel::probability(const std::vector<std::uint32_t>& context,
                               std::uint32_t event) const {
  const int ctx_len = config_.order - 1;
  std::vector<std::uint32_t> padded;
  const std::vector<std::uint32_t>* ctx = &context;
  if (static_cast<int>(context.size()) < ctx_len) {
    padded.assign(static_cast<std::size_t>(ctx_len) - context.size(), kBosId);
    padded.insert(padded.end(), context.begin(), context.end());
    ctx = &padded;
  }
  switch (config_.smoothing) {
    case Smoothing::MLE: {
      std::string ckey = context_key(*ctx, ctx_len);
      auto cit = raw_ctx_[config_.order - 1].find(ckey);
      append_id(ckey, event);
      auto pit = raw_pairs_[config_.order - 1].find(ckey);
      if (cit == raw_ctx_[config_.order - 1].end() || cit->second.total == 0 ||
          pit == raw_pairs_[config_.order - 1].end() || pit->second == 0)
        throw DataError("mle surprisal is infinite for event '" +
                        word_for_id(event) + "'");
      return static_cast<double>(pit->second) /
             static_cast<double>(cit->second.total);
    }
    case Smoothing::AddAlpha: {
      std::string ckey = context_key(*ctx, ctx_len);
      double total = 0.0;
      auto cit = raw_ctx_[config_.order - 1].find(ckey);
      if (cit != raw_ctx_[config_.order - 1].end())
        total = static_cast<double>(cit->second.total);
      append_id(ckey, event);
      double count = 0.0;
      auto pit = raw_pairs_[config_.order - 1].find(ckey);
      if (pit != raw_pairs_[config_.order - 1].end())
        count = static_cast<double>(pit->second);
      const double vocab = static_cast<double>(event_count());
      return (count + config_.alpha) / (total + config_.alpha * vocab);
    }
    case Smoothing::InterpolatedKN:
      return order_probability(config_.order, ctx->data() + ctx->size(), event);
  }
  throw ContractError("unreachable smoothing mode");
}

double NGramModel::surprisal_bits(const std::vector<std::uint32_t>& context,
                                  std::uint32_t event) const {
  return -std::log2(probability(context, event));
}

void NGramModel::save(std::ostream& out, const std::string& annotation) const {
  out.write(kMagic, 4);
  write_pod<std::uint32_t>(out, kFormatVersion);
  write_string(out, annotation);
  write_pod<std::int32_t>(out, config_.order);
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(config_.smoothing));
  write_pod<double>(out, config_.discount);
  write_pod<double>(out, config_.alpha);
  write_pod<std::int32_t>(out, config_.unk_min_count);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(id_to_word_.size()));
  for (const auto& word : id_to_word_) write_string(out, word);
  for (int k = 1; k <= config_.order; ++k) {
    const PairCounts& pairs = raw_pairs_[k - 1];
    std::vector<const PairCounts::value_type*> sorted;
    sorted.reserve(pairs.size());
    for (const auto& entry : pairs) sorted.push_back(&entry);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->first < b->first; });
    write_pod<std::uint64_t>(out, sorted.size());
    for (const auto* entry : sorted) {
      out.write(entry->first.data(),
                static_cast<std::streamsize>(entry->first.size()));
      write_pod<std::uint64_t>(out, entry->second);
    }
  }
  if (!out) throw DataError("model write failed");
}

namespace {

// Rebuild per-context totals from pair counts; each pair is one distinct
// event for its context.
void rebuild_context_stats(const NGramModel::PairCounts& pairs,
                           NGramModel::ContextCounts& contexts) {
  for (const auto& [key, count] : pairs) {
    auto& stat = contexts[key.substr(0, key.size() - 4)];
    stat.total += count;
    stat.distinct += 1;
  }
}

}  // namespace

void derive_continuation(NGramModel& model);

NGramModel NGramModel::load(std::istream& in, std::string* annotation) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a model file (bad magic)");
  auto version = read_pod<std::uint32_t>(in);
  if (version != kFormatVersion)
    throw DataError("unsupported model format version " +
                    std::to_string(version));
  std::string note = read_string(in);
  if (annotation != nullptr) *annotation = std::move(note);
  NGramModel model;
  model.config_.order = read_pod<std::int32_t>(in);
  model.config_.smoothing = static_cast<Smoothing>(read_pod<std::uint8_t>(in));
  model.config_.discount = read_pod<double>(in);
  model.config_.alpha = read_pod<double>(in);
  model.config_.unk_min_count = read_pod<std::int32_t>(in);
  model.config_.validate();
  auto vocab_size = read_pod<std::uint32_t>(in);
  if (vocab_size < 3) throw DataError("model vocabulary too small");
  model.id_to_word_.reserve(vocab_size);
  for (std::uint32_t i = 0; i < vocab_size; ++i)
    model.id_to_word_.push_back(read_string(in));
  for (std::uint32_t i = 3; i < vocab_size; ++i)
    model.word_to_id_[model.id_to_word_[i]] = i;
  model.raw_pairs_.resize(model.config_.order);
  model.raw_ctx_.resize(model.config_.order);
  for (int k = 1; k <= model.config_.order; ++k) {
    auto n_pairs = read_pod<std::uint64_t>(in);
    auto& pairs = model.raw_pairs_[k - 1];
    pairs.reserve(n_pairs);
    const std::size_t key_len = 4 * static_cast<std::size_t>(k);
    for (std::uint64_t i = 0; i < n_pairs; ++i) {
      std::string key(key_len, '\0');
      in.read(key.data(), static_cast<std::streamsize>(key_len));
      if (!in) throw DataError("model file truncated");
      pairs[std::move(key)] = read_pod<std::uint64_t>(in);
    }
    rebuild_context_stats(pairs, model.raw_ctx_[k - 1]);
  }
  derive_continuation(model);
  return model;
}

// Continuation counts for orders below the top: how many distinct one-id
// extensions of each context produced each event.
void derive_continuation(NGramModel& model) {
  model.cont_pairs_.assign(model.config_.order, {});
  model.cont_ctx_.assign(model.config_.order, {});
  if (model.config_.smoothing != Smoothing::InterpolatedKN) return;
  for (int k = 1; k < model.config_.order; ++k) {
    const auto& upper = model.raw_pairs_[k];  // windows of length k+1
    auto& pairs = model.cont_pairs_[k - 1];
    auto& contexts = model.cont_ctx_[k - 1];
    for (const auto& [key, count] : upper) {
      (void)count;
      auto& cc = pairs[key.substr(4)];
      auto& stat = contexts[key.substr(4, key.size() - 8)];
      if (cc == 0) stat.distinct += 1;
      cc += 1;
      stat.total += 1;
    }
  }
}

NGramTrainer::NGramTrainer(NGramConfig config) : config_(config) {
  config_.validate();
  model_.config_ = config_;
}

void NGramTrainer::count_vocab(const SentenceRecord& record) {
  if (vocab_done_)
    throw ContractError("count_vocab called after finish_vocab");
  for (const auto& word : record.words) ++word_counts_[word];
}

void NGramTrainer::finish_vocab() {
  if (vocab_done_) throw ContractError("finish_vocab called twice");
  vocab_done_ = true;
  model_.id_to_word_ = {"<unk>", "<eos>", "<bos>"};
  std::vector<std::string> kept;
  for (const auto& [word, count] : word_counts_)
    if (count >= static_cast<std::uint64_t>(config_.unk_min_count))
      kept.push_back(word);
  std::sort(kept.begin(), kept.end());
  for (auto& word : kept) {
    model_.word_to_id_[word] =
        static_cast<std::uint32_t>(model_.id_to_word_.size());
    model_.id_to_word_.push_back(std::move(word));
  }
  model_.raw_pairs_.resize(config_.order);
  model_.raw_ctx_.resize(config_.order);
  context_.assign(config_.order - 1, kBosId);
}

void NGramTrainer::add_event(std::uint32_t event) {
  for (int k = 1; k <= config_.order; ++k) {
    std::string ckey = context_key(context_, k - 1);
    auto& stat = model_.raw_ctx_[k - 1][ckey];
    append_id(ckey, event);
    auto& count = model_.raw_pairs_[k - 1][ckey];
    if (count == 0) stat.distinct += 1;
    count += 1;
    stat.total += 1;
  }
  if (config_.order > 1) {
    context_.erase(context_.begin());
    context_.push_back(event);
  }
  ++events_seen_;
}

void NGramTrainer::count_ngrams(const SentenceRecord& record) {
  if (!vocab_done_)
    throw ContractError("count_ngrams called before finish_vocab");
  if (!in_doc_ || record.doc_id != current_doc_) {
    if (in_doc_) finished_docs_.insert(fnv1a64(current_doc_));
    if (finished_docs_.count(fnv1a64(record.doc_id)))
      throw DataError("document '" + record.doc_id +
                      "' reappears in training stream");
    current_doc_ = record.doc_id;
    in_doc_ = true;
    context_.assign(config_.order - 1, kBosId);
  }
  for (const auto& word : record.words) add_event(model_.word_id(word));
  add_event(kEosId);
}

NGramModel NGramTrainer::finish() {
  if (!vocab_done_) throw ContractError("finish called before finish_vocab");
  if (events_seen_ == 0) throw DataError("empty training stream");
  derive_continuation(model_);
  return std::move(model_);
}

ScoreSession::ScoreSession(const NGramModel& model) : model_(model) {
  context_.assign(model_.config().order - 1, kBosId);
}

SurprisalRecord ScoreSession::score(const SentenceRecord& record) {
  if (!in_doc_ || record.doc_id != current_doc_) {
    if (in_doc_) finished_docs_.insert(fnv1a64(current_doc_));
    if (finished_docs_.count(fnv1a64(record.doc_id)))
      throw DataError("document '" + record.doc_id +
                      "' out of order in scoring stream");
    current_doc_ = record.doc_id;
    in_doc_ = true;
    last_sent_idx_ = -1;
    context_.assign(model_.config().order - 1, kBosId);
  }
  if (record.sent_idx <= last_sent_idx_)
    throw DataError("document '" + record.doc_id +
                    "' sentences out of order (sentence " +
                    std::to_string(record.sent_idx) + " after " +
                    std::to_string(last_sent_idx_) + ")");
  last_sent_idx_ = record.sent_idx;
  SurprisalRecord out;
  out.doc_id = record.doc_id;
  out.sent_idx = record.sent_idx;
  out.surprisals.reserve(record.words.size());
  auto push = [&](std::uint32_t event) {
    double bits = model_.surprisal_bits(context_, event);
    if (model_.config().order > 1) {
      context_.erase(context_.begin());
      context_.push_back(event);
    }
    return bits;
  };
  for (const auto& word : record.words)
    out.surprisals.push_back(push(model_.word_id(word)));
  out.eos_surprisal = push(kEosId);
  return out;
}

NGramModel train_ngram(const std::vector<SentenceRecord>& records,
                       const NGramConfig& config) {
  NGramTrainer trainer(config);
  for (const auto& record : records) trainer.count_vocab(record);
  trainer.finish_vocab();
  for (const auto& record : records) trainer.count_ngrams(record);
  return trainer.finish();
}

std::vector<SurprisalRecord> score_records(
    const NGramModel& model, const std::vector<SentenceRecord>& records) {
  ScoreSession session(model);
  std::vector<SurprisalRecord> out;
  out.reserve(records.size());
  for (const auto& record : records) out.push_back(session.score(record));
  return out;
}

}  // namespace wordorder
