#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wordorder/analysis.hpp"
#include "wordorder/grammar.hpp"
#include "wordorder/ngram.hpp"
#include "wordorder/treebank.hpp"
#include "wordorder/uid.hpp"

namespace wordorder {

// Pipeline stages behind the command-line subcommands. Every stage hashes its
// resolved settings, embeds that hash in each file it writes, and records the
// outputs (with checksums) in the run directory's manifest.json, so stale
// upstream files are caught instead of silently mixed.

// Document-level corpus split. part -1 = the whole corpus, otherwise an index
// into ratios (0 = train, 1 = dev, 2 = test by convention).
struct SplitOptions {
  std::vector<double> ratios{0.8, 0.1, 0.1};
  std::uint64_t seed = 0;
  int part = -1;
};

// "train" / "dev" / "test" / "all"; throws ConfigError otherwise.
int split_part_from_string(const std::string& name);
bool split_admits(const SplitOptions& split, const std::string& doc_id);

struct StageSummary {
  std::vector<std::string> outputs;  // paths written, primary first
  std::uint64_t records = 0;         // sentences through the stage
  std::uint64_t documents = 0;
  std::uint64_t skipped = 0;       // sentences dropped (invalid or filtered)
  std::uint64_t parse_errors = 0;  // malformed input records (lenient mode)
  std::string config_hash;
  std::vector<std::string> notes;  // one-line facts for the terminal
};

struct TransformOptions {
  std::string language = "und";
  std::filesystem::path input;    // CoNLL-U treebank
  std::filesystem::path out_dir;  // corpus files land here
  std::vector<std::string> variants;  // tags; empty = all 14
  std::filesystem::path approx_grammar;
  std::filesystem::path efficient_ov_grammar;
  std::filesystem::path efficient_vo_grammar;
  std::filesystem::path min_dl_grammar;  // optional: skip fitting
  std::filesystem::path freq_table;      // Sort-Freq / Sort-Freq-Rev
  std::vector<std::string> promotion;    // empty = default relation set
  std::uint64_t budget = 0;              // word budget; 0 = everything
  long long seed = 0;
  bool strict = false;
  int fallback_doc_sentences = 0;
  int min_dl_iterations = 300;  // grammar fit when no file is given
  int min_dl_restarts = 3;
  int min_dl_sample = 200;  // trees fed to the optimizer
  std::filesystem::path manifest;  // default: out_dir/manifest.json
};
StageSummary run_transform(const TransformOptions& options);

struct FreqOptions {
  std::filesystem::path corpus;  // JSONL corpus
  std::filesystem::path out;     // word<TAB>count table
  std::filesystem::path manifest;
};
StageSummary run_freq(const FreqOptions& options);

struct TrainOptions {
  std::filesystem::path corpus;
  std::filesystem::path model;
  NGramConfig lm;
  SplitOptions split;
  std::filesystem::path manifest;
};
StageSummary run_train(const TrainOptions& options);

struct ScoreOptions {
  std::filesystem::path corpus;
  std::filesystem::path model;
  std::filesystem::path out;  // per-word surprisal TSV
  SplitOptions split;
  std::filesystem::path manifest;
};
StageSummary run_score(const ScoreOptions& options);

struct ImportOptions {
  std::filesystem::path corpus;
  std::filesystem::path rows;  // external (possibly sub-word) surprisal TSV
  std::filesystem::path out;   // word-level TSV aligned to the corpus
  std::filesystem::path manifest;
};
StageSummary run_import(const ImportOptions& options);

struct UidOptions {
  std::filesystem::path surprisal;  // word-level TSV
  std::string language;
  std::string variant;  // one of the 14 tags
  std::string dataset_size;
  long long seed = 0;          // run identifier, echoed into the row
  std::filesystem::path runs;  // RunRecord CSV, upserted
  std::filesystem::path metrics_out;  // optional per-metric CSV with CIs
  MetricConfig metric;
  std::filesystem::path manifest;
};
StageSummary run_uid(const UidOptions& options);

struct RegressOptions {
  std::filesystem::path runs;
  std::filesystem::path out;  // coefficients CSV
  std::string reference = "Real";
  std::filesystem::path manifest;
};
StageSummary run_regress(const RegressOptions& options);

struct ReportStageOptions {
  std::filesystem::path runs;
  std::filesystem::path out;              // group-summary CSV
  std::filesystem::path comparisons_out;  // optional sign-test CSV
  std::string comparisons;  // "Real:Reverse,Real:Min-DL-Opt"
  int bootstrap_resamples = 2000;
  std::uint64_t bootstrap_seed = 2024;
  std::filesystem::path manifest;
};
StageSummary run_report(const ReportStageOptions& options);

struct ValidateOptions {
  std::filesystem::path input;
  int fallback_doc_sentences = 0;
  std::vector<std::filesystem::path> grammars;  // weight files to check
};

struct ValidateSummary {
  std::uint64_t sentences = 0;  // well-formed trees
  std::uint64_t documents = 0;
  std::uint64_t tokens = 0;
  std::uint64_t parse_errors = 0;
  std::uint64_t tree_problems = 0;  // trees failing validate_tree
  bool used_fallback_docs = false;
  std::vector<std::string> problems;  // sample diagnostics, capped
  std::vector<std::string> notes;

  bool ok() const { return parse_errors == 0 && tree_problems == 0; }
};
ValidateSummary run_validate(const ValidateOptions& options);

}  // namespace wordorder
