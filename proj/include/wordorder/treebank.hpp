#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace wordorder {

struct Token {
  int index = 0;  // 1-based surface position
  std::string form;
  std::string upos;
  int head = 0;  // 0 = root
  std::string deprel;  // base relation; subtype after ':' dropped

  friend bool operator==(const Token&, const Token&) = default;
};

struct DepTree {
  std::string doc_id;
  int sent_idx = 0;  // 0-based position within the document
  std::vector<Token> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
  // 1-based access.
  const Token& at(int index) const { return tokens[index - 1]; }
  Token& at(int index) { return tokens[index - 1]; }
  // Index of the (first) token with head == 0, or 0 if there is none.
  int root_index() const;
  // children[i] = dependents of token i in surface order; children[0] unused.
  std::vector<std::vector<int>> children() const;
  std::vector<std::string> surface_forms() const;
};

struct TreeProblem {
  enum class Kind {
    BadIndexing,     // token indices not contiguous 1..N
    SelfHead,        // head == index
    HeadOutOfRange,  // head < 0 or head > N
    NoRoot,
    MultipleRoots,
    RootLabel,  // head == 0 but deprel != "root"
    EmptyDeprel,
    Cycle,
    Disconnected,
  };
  Kind kind;
  int token = 0;  // offending token index, 0 when tree-wide
  std::string detail;
};

using ValidationReport = std::vector<TreeProblem>;

// Empty report iff the DepTree invariants hold.
ValidationReport validate_tree(const DepTree& t);
bool has_problem(const ValidationReport& report, TreeProblem::Kind kind);
std::string describe(const TreeProblem& p);

// Default promotion set (the convention of the prior work the formalism
// builds on).
const std::set<std::string>& default_promotion_relations();

// Function words become heads: for each head with a dependent attached by a
// relation in `relations`, the (leftmost) such dependent takes the head's
// former head and relation, and the head attaches to the dependent under the
// original relation. Other dependents stay put. Bottom-up, one pass.
DepTree promote_function_heads(const DepTree& t,
                               const std::set<std::string>& relations);

// Removes deprel == "punct" tokens; children of a removed token reattach to
// its nearest surviving ancestor. Throws DataError if nothing survives.
DepTree strip_punct(const DepTree& t);

struct ConlluOptions {
  bool strict = false;
  // Used only when the input has no "# newdoc" comments: start a new document
  // every N sentences. 0 keeps everything in one document.
  int fallback_doc_sentences = 0;
};

struct ConlluRecordError {
  long long line = 0;
  std::string message;
};

// Streaming CoNLL-U reader. One DepTree per sentence block; multiword-token
// ranges ("i-j") and empty nodes ("i.1") are skipped; deprel subtypes are
// truncated at ':'. In lenient mode malformed sentences are dropped and
// recorded in errors(); in strict mode the first malformed record throws.
class ConlluReader {
 public:
  explicit ConlluReader(std::istream& in, ConlluOptions options = {});

  std::optional<DepTree> next();

  const std::vector<ConlluRecordError>& errors() const { return errors_; }
  bool used_fallback_docs() const { return used_fallback_; }
  long long sentences_read() const { return sentences_read_; }

 private:
  std::istream& in_;
  ConlluOptions options_;
  std::vector<ConlluRecordError> errors_;
  std::string doc_id_;
  bool doc_open_ = false;
  bool seen_newdoc_ = false;
  bool used_fallback_ = false;
  int doc_counter_ = 0;
  int sent_in_doc_ = 0;
  long long line_no_ = 0;
  long long sentences_read_ = 0;
};

std::vector<DepTree> parse_conllu(std::istream& in, ConlluOptions options = {},
                                  std::vector<ConlluRecordError>* errors = nullptr);
std::vector<DepTree> parse_conllu_string(const std::string& text,
                                         ConlluOptions options = {});

// Serializes the fields the reader consumes (10-column lines, "_" elsewhere);
// sentences with sent_idx == 0 are preceded by "# newdoc id = <doc_id>".
void to_conllu(const DepTree& t, std::ostream& out);

}  // namespace wordorder
