#include "wordorder/corpus.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "wordorder/errors.hpp"
#include "wordorder/text.hpp"
#include "wordorder/util.hpp"

namespace wordorder {

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> kAll = {
      Variant::Real,        Variant::Approx,      Variant::Random1,
      Variant::Random2,     Variant::Random3,     Variant::Random4,
      Variant::Random5,     Variant::EfficientOV, Variant::EfficientVO,
      Variant::MinDLOpt,    Variant::MinDLLoc,    Variant::SortFreq,
      Variant::SortFreqRev, Variant::Reverse};
  return kAll;
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Real: return "Real";
    case Variant::Approx: return "Approx";
    case Variant::Random1: return "Random1";
    case Variant::Random2: return "Random2";
    case Variant::Random3: return "Random3";
    case Variant::Random4: return "Random4";
    case Variant::Random5: return "Random5";
    case Variant::EfficientOV: return "Efficient-OV";
    case Variant::EfficientVO: return "Efficient-VO";
    case Variant::MinDLOpt: return "Min-DL-Opt";
    case Variant::MinDLLoc: return "Min-DL-Loc";
    case Variant::SortFreq: return "Sort-Freq";
    case Variant::SortFreqRev: return "Sort-Freq-Rev";
    case Variant::Reverse: return "Reverse";
  }
  throw ContractError("unknown variant enum value");
}

Variant variant_from_string(const std::string& name) {
  for (Variant v : all_variants())
    if (variant_name(v) == name) return v;
  throw ConfigError("unknown variant '" + name +
                    "' (expected one of Real, Approx, Random1..Random5, "
                    "Efficient-OV, Efficient-VO, Min-DL-Opt, Min-DL-Loc, "
                    "Sort-Freq, Sort-Freq-Rev, Reverse)");
}

bool variant_is_tree_based(Variant v) {
  switch (v) {
    case Variant::Real:
    case Variant::SortFreq:
    case Variant::SortFreqRev:
    case Variant::Reverse:
      return false;
    default:
      return true;
  }
}

bool variant_needs_grammar(Variant v) {
  return variant_is_tree_based(v) && v != Variant::MinDLLoc;
}

bool variant_needs_freq_table(Variant v) {
  return v == Variant::SortFreq || v == Variant::SortFreqRev;
}

SentenceRecord apply_variant(const DepTree& tree, Variant v,
                             const VariantContext& ctx) {
  const DepTree stripped = strip_punct(tree);

  SentenceRecord record;
  record.doc_id = tree.doc_id;
  record.sent_idx = tree.sent_idx;

  if (variant_is_tree_based(v)) {
    const std::set<std::string>& promotion =
        ctx.promotion_relations ? *ctx.promotion_relations
                                : default_promotion_relations();
    const DepTree promoted = promote_function_heads(stripped, promotion);
    std::vector<int> order;
    if (v == Variant::MinDLLoc) {
      order = min_dl_local_order(promoted);
    } else {
      if (!ctx.grammar)
        throw ContractError("apply_variant: " + variant_name(v) +
                            " requires a grammar");
      order = linearize(promoted, *ctx.grammar);
    }
    for (int index : order)
      record.words.push_back(fold_case(promoted.at(index).form));
  } else {
    std::vector<std::string> real_words;
    for (const Token& tok : stripped.tokens)
      real_words.push_back(fold_case(tok.form));
    switch (v) {
      case Variant::Real:
        record.words = std::move(real_words);
        break;
      case Variant::Reverse:
        record.words = reverse_transform(real_words);
        break;
      case Variant::SortFreq:
      case Variant::SortFreqRev:
        if (!ctx.freqs)
          throw ContractError("apply_variant: " + variant_name(v) +
                              " requires a frequency table");
        record.words = sort_freq_transform(real_words, *ctx.freqs,
                                           v == Variant::SortFreq
                                               ? SortDirection::Descending
                                               : SortDirection::Ascending);
        break;
      default:
        throw ContractError("unhandled variant");
    }
  }
  record.words.push_back(".");
  return record;
}

namespace {

void check_record_invariants(const SentenceRecord& r, const std::string& where) {
  if (r.words.empty())
    throw DataError(where + ": record has no words (doc " + r.doc_id + ")");
  if (r.words.back() != ".")
    throw DataError(where + ": missing sentence terminator (doc " + r.doc_id +
                    ", sentence " + std::to_string(r.sent_idx) + ")");
  if (r.sent_idx < 0)
    throw DataError(where + ": negative sent_idx (doc " + r.doc_id + ")");
  if (r.doc_id.empty()) throw DataError(where + ": empty doc_id");
  for (const std::string& w : r.words)
    if (w.empty())
      throw DataError(where + ": empty word (doc " + r.doc_id + ", sentence " +
                      std::to_string(r.sent_idx) + ")");
}

// Shared (doc_id, sent_idx) uniqueness tracking. Documents are contiguous in
// stream order, so memory stays bounded by document count, not word count.
void track_uniqueness(const SentenceRecord& r, const std::string& where,
                      std::string& current_doc, bool& have_doc,
                      std::set<int>& current_sent_idx,
                      std::unordered_set<std::uint64_t>& finished_docs) {
  if (!have_doc || r.doc_id != current_doc) {
    if (have_doc) finished_docs.insert(fnv1a64(current_doc));
    if (finished_docs.count(fnv1a64(r.doc_id)))
      throw DataError(where + ": document '" + r.doc_id +
                      "' reappears after other documents");
    current_doc = r.doc_id;
    have_doc = true;
    current_sent_idx.clear();
  }
  if (!current_sent_idx.insert(r.sent_idx).second)
    throw DataError(where + ": duplicate sentence index " +
                    std::to_string(r.sent_idx) + " in document '" + r.doc_id +
                    "'");
}

}  // namespace

RecordWriter::RecordWriter(std::ostream& out) : out_(out) {}

void RecordWriter::write_meta(const nlohmann::json& meta) {
  if (!meta_allowed_)
    throw ContractError("RecordWriter: meta must precede all records");
  nlohmann::json line;
  line["meta"] = meta;
  out_ << line.dump() << '\n';
  meta_allowed_ = false;
}

void RecordWriter::write(const SentenceRecord& record) {
  check_record_invariants(record, "write_records");
  track_uniqueness(record, "write_records", current_doc_, have_doc_,
                   current_sent_idx_, finished_docs_);
  meta_allowed_ = false;
  nlohmann::json line;
  line["doc_id"] = record.doc_id;
  line["sent_idx"] = record.sent_idx;
  line["words"] = record.words;
  out_ << line.dump() << '\n';
  ++records_;
}

RecordReader::RecordReader(std::istream& in) : in_(in) {}

void RecordReader::read_meta_if_any() {
  if (meta_checked_) return;
  meta_checked_ = true;
  std::string line;
  if (!std::getline(in_, line)) return;
  ++line_no_;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
  if (parsed.is_object() && parsed.contains("meta")) {
    meta_ = parsed["meta"];
    return;
  }
  pending_line_ = std::move(line);  // first line is an ordinary record
}

const std::optional<nlohmann::json>& RecordReader::meta() {
  read_meta_if_any();
  return meta_;
}

SentenceRecord RecordReader::parse_line(const std::string& line) {
  const std::string where = "read_records line " + std::to_string(line_no_);
  nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object())
    throw DataError(where + ": not a JSON object");
  if (!parsed.contains("doc_id") || !parsed["doc_id"].is_string() ||
      !parsed.contains("sent_idx") || !parsed["sent_idx"].is_number_integer() ||
      !parsed.contains("words") || !parsed["words"].is_array())
    throw DataError(where + ": expected doc_id, sent_idx, words");
  SentenceRecord record;
  record.doc_id = parsed["doc_id"].get<std::string>();
  record.sent_idx = parsed["sent_idx"].get<int>();
  for (const auto& w : parsed["words"]) {
    if (!w.is_string()) throw DataError(where + ": non-string word");
    record.words.push_back(w.get<std::string>());
  }
  check_record_invariants(record, where);
  return record;
}

std::optional<SentenceRecord> RecordReader::next() {
  read_meta_if_any();
  for (;;) {
    std::string line;
    if (pending_line_) {
      line = std::move(*pending_line_);
      pending_line_.reset();
    } else if (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
    } else {
      return std::nullopt;
    }
    if (line.empty()) continue;
    SentenceRecord record = parse_line(line);
    track_uniqueness(record, "read_records line " + std::to_string(line_no_),
                     current_doc_, have_doc_, current_sent_idx_,
                     finished_docs_);
    return record;
  }
}

Subsampler::Subsampler(std::uint64_t word_budget) : budget_(word_budget) {
  if (word_budget < 1)
    throw ConfigError("subsample: word budget must be >= 1");
}

bool Subsampler::admit(const SentenceRecord& record) {
  if (!have_doc_ || record.doc_id != current_doc_) {
    current_doc_ = record.doc_id;
    have_doc_ = true;
    if (closed_ || emitted_words_ >= budget_) {
      closed_ = true;
      current_admitted_ = false;
    } else {
      current_admitted_ = true;
      ++admitted_docs_;
    }
  }
  if (current_admitted_) emitted_words_ += record.word_count();
  return current_admitted_;
}

void Subsampler::finish() {
  if (emitted_words_ < budget_)
    warn("subsample: corpus exhausted at " + std::to_string(emitted_words_) +
         " words, short of the " + std::to_string(budget_) + "-word budget");
}

int assign_split(const std::string& doc_id, const SplitSpec& spec) {
  if (spec.ratios.empty())
    throw ConfigError("split: no ratios given");
  double sum = 0.0;
  for (double r : spec.ratios) {
    if (!(r > 0.0)) throw ConfigError("split: ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("split: ratios must sum to 1 (got " +
                      format_double(sum) + ")");
  const double u = unit_double(splitmix64(fnv1a64(doc_id) ^ spec.seed));
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < spec.ratios.size(); ++i) {
    cumulative += spec.ratios[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  return static_cast<int>(spec.ratios.size()) - 1;
}

}  // namespace wordorder
