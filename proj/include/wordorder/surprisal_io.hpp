#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wordorder/corpus.hpp"
#include "wordorder/surprisal.hpp"

namespace wordorder {

// TSV of per-unit surprisals: doc_id, sent_idx, word_idx, unit,
// surprisal_bits. EOS rows carry word_idx -1 and unit "<eos>". Lines
// starting with '#' are comments.

class SurprisalWriter {
 public:
  explicit SurprisalWriter(std::ostream& out);
  void write_comment(const std::string& text);
  // One row per word plus the EOS row; words supply the unit column.
  void write(const SentenceRecord& sentence, const SurprisalRecord& scores);

 private:
  std::ostream& out_;
};

// Reads sub-word rows and aggregates them per word by summation, checking
// alignment against the corpus records it is driven with.
class SurprisalImporter {
 public:
  explicit SurprisalImporter(std::istream& in);
  SurprisalRecord next(const SentenceRecord& sentence);
  // Throws if rows remain after the corpus is exhausted.
  void finish();

 private:
  struct Row {
    std::string doc_id;
    int sent_idx = 0;
    long long word_idx = 0;
    double surprisal = 0.0;
  };
  bool fetch();  // fills pending_ from the stream; false at EOF

  std::istream& in_;
  std::optional<Row> pending_;
  long long line_no_ = 0;
};

// Loads a whole word-level surprisal file: rows grouped contiguously per
// (doc_id, sent_idx), word_idx dense from 0, with the usual doc/sentence
// ordering checks. Throws DataError on gaps or disorder.
std::vector<SurprisalRecord> read_surprisal_records(std::istream& in);

}  // namespace wordorder
