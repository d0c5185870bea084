#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "wordorder/freq.hpp"
#include "wordorder/grammar.hpp"
#include "wordorder/treebank.hpp"

namespace wordorder {

// One transformed sentence: ordered lowercase words ending with ".".
struct SentenceRecord {
  std::string doc_id;
  int sent_idx = 0;
  std::vector<std::string> words;

  bool document_initial() const { return sent_idx == 0; }
  // Words excluding the final terminator.
  std::size_t word_count() const {
    if (words.empty()) return 0;
    return words.back() == "." ? words.size() - 1 : words.size();
  }
  friend bool operator==(const SentenceRecord&, const SentenceRecord&) = default;
};

enum class Variant {
  Real,
  Approx,
  Random1,
  Random2,
  Random3,
  Random4,
  Random5,
  EfficientOV,
  EfficientVO,
  MinDLOpt,
  MinDLLoc,
  SortFreq,
  SortFreqRev,
  Reverse,
};

const std::vector<Variant>& all_variants();
// Canonical tag ("Efficient-OV", "Min-DL-Loc", ...).
std::string variant_name(Variant v);
// Throws ConfigError for unknown tags.
Variant variant_from_string(const std::string& name);
// Variants that reorder via the dependency tree (promotion + linearization).
bool variant_is_tree_based(Variant v);
// Tree-based variants whose ordering comes from a ConsistentGrammar.
bool variant_needs_grammar(Variant v);
bool variant_needs_freq_table(Variant v);

struct VariantContext {
  const ConsistentGrammar* grammar = nullptr;  // grammar-based variants
  const FreqTable* freqs = nullptr;            // Sort-Freq / Sort-Freq-Rev
  const std::set<std::string>* promotion_relations = nullptr;  // default set if null
};

// strip_punct -> (tree-based: promote + linearize | Real: surface order |
// Reverse / Sort-Freq: transform of the Real sequence) -> case-fold ->
// append ".". Throws DataError for all-punct sentences, ContractError for a
// missing resource.
SentenceRecord apply_variant(const DepTree& tree, Variant v,
                             const VariantContext& ctx);

// JSONL corpus writer. One JSON object per line; an optional meta object
// ({"meta": ...}) may be written first. Validates record invariants and
// (doc_id, sent_idx) uniqueness as it goes.
class RecordWriter {
 public:
  explicit RecordWriter(std::ostream& out);
  void write_meta(const nlohmann::json& meta);
  void write(const SentenceRecord& record);
  std::uint64_t records_written() const { return records_; }

 private:
  std::ostream& out_;
  std::uint64_t records_ = 0;
  bool meta_allowed_ = true;
  std::string current_doc_;
  bool have_doc_ = false;
  std::set<int> current_sent_idx_;
  std::unordered_set<std::uint64_t> finished_docs_;
};

// Streaming JSONL corpus reader; mirrors RecordWriter's checks.
class RecordReader {
 public:
  explicit RecordReader(std::istream& in);
  std::optional<SentenceRecord> next();
  // Meta object from the first line, if present (read lazily on first next()).
  const std::optional<nlohmann::json>& meta();

 private:
  void read_meta_if_any();
  SentenceRecord parse_line(const std::string& line);

  std::istream& in_;
  long long line_no_ = 0;
  bool meta_checked_ = false;
  std::optional<std::string> pending_line_;
  std::optional<nlohmann::json> meta_;
  std::string current_doc_;
  bool have_doc_ = false;
  std::set<int> current_sent_idx_;
  std::unordered_set<std::uint64_t> finished_docs_;
};

// Whole-document subsampling: documents pass in stream order until the
// cumulative word count (terminator excluded) first reaches the budget; the
// crossing document is included whole.
class Subsampler {
 public:
  explicit Subsampler(std::uint64_t word_budget);
  // True if the sentence's document is within the sample.
  bool admit(const SentenceRecord& record);
  // Warns if the corpus ran out before the budget was met.
  void finish();

  std::uint64_t emitted_words() const { return emitted_words_; }
  std::uint64_t admitted_documents() const { return admitted_docs_; }

 private:
  std::uint64_t budget_;
  std::uint64_t emitted_words_ = 0;
  std::uint64_t admitted_docs_ = 0;
  std::string current_doc_;
  bool have_doc_ = false;
  bool current_admitted_ = false;
  bool closed_ = false;
};

struct SplitSpec {
  std::vector<double> ratios;  // positive, sum to 1
  std::uint64_t seed = 0;
};

// Deterministic document-level split assignment: hash of doc_id and seed
// against cumulative ratios. Throws ConfigError for bad ratios.
int assign_split(const std::string& doc_id, const SplitSpec& spec);

}  // namespace wordorder
