#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wordorder/errors.hpp"
#include "wordorder/ngram.hpp"
#include "wordorder/pipeline.hpp"
#include "wordorder/uid.hpp"

namespace {

using namespace wordorder;

void print_summary(const StageSummary& summary) {
  if (summary.records > 0) {
    std::cout << summary.records << " sentences";
    if (summary.documents > 0)
      std::cout << " in " << summary.documents << " documents";
    std::cout << "\n";
  }
  for (const auto& note : summary.notes) std::cout << note << "\n";
  for (const auto& out : summary.outputs) std::cout << "wrote " << out << "\n";
  std::cout << "config hash " << summary.config_hash << "\n";
}

void add_split_flags(CLI::App* cmd, std::string& part,
                     std::vector<double>& ratios, std::uint64_t& seed) {
  cmd->add_option("--split", part,
                  "portion of the document split to use (train, dev, test, "
                  "all)")
      ->default_str("all");
  cmd->add_option("--split-ratios", ratios,
                  "train,dev,test ratios (must sum to 1)")
      ->delimiter(',');
  cmd->add_option("--split-seed", seed, "seed for the document-split hash");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Word-order counterfactual corpora and information-density "
      "measurement"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "INI file with [subcommand] sections; command-line flags "
                 "win");
  app.set_version_flag("--version", "wordorder 0.1.0");

  TransformOptions transform_options;
  auto* transform = app.add_subcommand(
      "transform", "Rewrite a treebank into parallel variant corpora");
  transform->add_option("--input", transform_options.input,
                        "CoNLL-U dependency treebank")
      ->required();
  transform->add_option("--out-dir", transform_options.out_dir,
                        "directory for corpus.<Variant>.jsonl files")
      ->required();
  transform->add_option("--language", transform_options.language,
                        "language label recorded in every output");
  transform
      ->add_option("--variants", transform_options.variants,
                   "variant tags (default: all 14)")
      ->delimiter(',');
  transform->add_option("--grammar-approx", transform_options.approx_grammar,
                        "weights file for Approx");
  transform->add_option("--grammar-efficient-ov",
                        transform_options.efficient_ov_grammar,
                        "weights file for Efficient-OV");
  transform->add_option("--grammar-efficient-vo",
                        transform_options.efficient_vo_grammar,
                        "weights file for Efficient-VO");
  transform->add_option("--grammar-min-dl", transform_options.min_dl_grammar,
                        "weights file for Min-DL-Opt (default: fit one)");
  transform->add_option("--freq-table", transform_options.freq_table,
                        "word-frequency table for Sort-Freq variants");
  transform
      ->add_option("--promotion", transform_options.promotion,
                   "function-word relations to promote (default: case, cop, "
                   "mark, cc)")
      ->delimiter(',');
  transform->add_option("--budget", transform_options.budget,
                        "stop after this many words (whole documents)");
  transform->add_option("--seed", transform_options.seed,
                        "seed for the Min-DL-Opt fit; recorded in outputs");
  transform->add_flag("--strict", transform_options.strict,
                      "fail on the first malformed or invalid sentence");
  transform->add_option("--fallback-doc-sentences",
                        transform_options.fallback_doc_sentences,
                        "document size when the input has no newdoc ids");
  transform->add_option("--min-dl-iterations",
                        transform_options.min_dl_iterations,
                        "coordinate-search iterations for the Min-DL fit");
  transform->add_option("--min-dl-restarts", transform_options.min_dl_restarts,
                        "random restarts for the Min-DL fit");
  transform->add_option("--min-dl-sample", transform_options.min_dl_sample,
                        "trees sampled for the Min-DL fit");
  transform->add_option("--manifest", transform_options.manifest,
                        "manifest path (default: <out-dir>/manifest.json)");

  FreqOptions freq_options;
  auto* freq = app.add_subcommand(
      "freq", "Count word frequencies over a transformed corpus");
  freq->add_option("--corpus", freq_options.corpus, "JSONL corpus")->required();
  freq->add_option("--out", freq_options.out, "word<TAB>count table")
      ->required();
  freq->add_option("--manifest", freq_options.manifest,
                   "manifest path (default: next to --out)");

  TrainOptions train_options;
  std::string train_split = "all";
  std::string train_smoothing = "interpolated-kn";
  auto* train =
      app.add_subcommand("train", "Train an n-gram surprisal model");
  train->add_option("--corpus", train_options.corpus, "JSONL corpus")
      ->required();
  train->add_option("--model", train_options.model, "model output path")
      ->required();
  train->add_option("--order", train_options.lm.order, "n-gram order");
  train->add_option("--smoothing", train_smoothing,
                    "mle, add-alpha or interpolated-kn");
  train->add_option("--discount", train_options.lm.discount,
                    "absolute discount for interpolated-kn");
  train->add_option("--alpha", train_options.lm.alpha,
                    "pseudo-count for add-alpha");
  train->add_option("--unk-min-count", train_options.lm.unk_min_count,
                    "words rarer than this become <unk>");
  add_split_flags(train, train_split, train_options.split.ratios,
                  train_options.split.seed);
  train->add_option("--manifest", train_options.manifest,
                    "manifest path (default: next to --model)");

  ScoreOptions score_options;
  std::string score_split = "all";
  auto* score = app.add_subcommand(
      "score", "Score a corpus with a trained model, one row per word");
  score->add_option("--corpus", score_options.corpus, "JSONL corpus")
      ->required();
  score->add_option("--model", score_options.model, "trained model")
      ->required();
  score->add_option("--out", score_options.out, "surprisal TSV output")
      ->required();
  add_split_flags(score, score_split, score_options.split.ratios,
                  score_options.split.seed);
  score->add_option("--manifest", score_options.manifest,
                    "manifest path (default: next to --out)");

  ImportOptions import_options;
  auto* import_cmd = app.add_subcommand(
      "import", "Align external (sub-word) surprisals to a corpus");
  import_cmd->add_option("--corpus", import_options.corpus, "JSONL corpus")
      ->required();
  import_cmd
      ->add_option("--tsv", import_options.rows,
                   "external surprisal rows (doc, sent, word_idx, unit, "
                   "bits)")
      ->required();
  import_cmd->add_option("--out", import_options.out, "word-level TSV output")
      ->required();
  import_cmd->add_option("--manifest", import_options.manifest,
                         "manifest path (default: next to --out)");

  UidOptions uid_options;
  std::string uid_filter = "all";
  std::string uid_ci = "bootstrap";
  auto* uid = app.add_subcommand(
      "uid", "Compute information-density metrics for one scored run");
  uid->add_option("--surprisal", uid_options.surprisal, "word-level TSV")
      ->required();
  uid->add_option("--language", uid_options.language, "language label")
      ->required();
  uid->add_option("--variant", uid_options.variant, "variant tag")->required();
  uid->add_option("--dataset-size", uid_options.dataset_size,
                  "dataset size label, e.g. 10k or 6.6M")
      ->required();
  uid->add_option("--seed", uid_options.seed, "run seed, echoed verbatim")
      ->required();
  uid->add_option("--runs", uid_options.runs, "run-record CSV (upserted)")
      ->required();
  uid->add_option("--metrics-out", uid_options.metrics_out,
                  "optional per-metric CSV with confidence intervals");
  uid->add_option("--k", uid_options.metric.k, "uid_p exponent (> 1)");
  uid->add_option("--filter", uid_filter,
                  "sentences to keep: all or document-initial");
  uid->add_option("--ci", uid_ci, "bootstrap or normal");
  uid->add_option("--resamples", uid_options.metric.bootstrap_resamples,
                  "bootstrap resample count");
  uid->add_option("--bootstrap-seed", uid_options.metric.bootstrap_seed,
                  "bootstrap RNG seed");
  uid->add_option("--manifest", uid_options.manifest,
                  "manifest path (default: next to --runs)");

  RegressOptions regress_options;
  auto* regress = app.add_subcommand(
      "regress", "Treatment-coded least squares over run records");
  regress->add_option("--runs", regress_options.runs, "run-record CSV")
      ->required();
  regress->add_option("--out", regress_options.out, "coefficients CSV")
      ->required();
  regress->add_option("--reference", regress_options.reference,
                      "reference variant absorbed into the intercept");
  regress->add_option("--manifest", regress_options.manifest,
                      "manifest path (default: next to --out)");

  ReportStageOptions report_options;
  auto* report = app.add_subcommand(
      "report", "Per-variant metric summary with bootstrap intervals");
  report->add_option("--runs", report_options.runs, "run-record CSV")
      ->required();
  report->add_option("--out", report_options.out, "summary CSV")->required();
  report->add_option("--comparisons", report_options.comparisons,
                     "sign-test pairs, e.g. Real:Reverse,Real:Min-DL-Opt");
  report->add_option("--comparisons-out", report_options.comparisons_out,
                     "sign-test CSV output");
  report->add_option("--resamples", report_options.bootstrap_resamples,
                     "bootstrap resample count");
  report->add_option("--bootstrap-seed", report_options.bootstrap_seed,
                     "bootstrap RNG seed");
  report->add_option("--manifest", report_options.manifest,
                     "manifest path (default: next to --out)");

  ValidateOptions validate_options;
  auto* validate = app.add_subcommand(
      "validate", "Check a treebank (and optional grammars) for problems");
  validate->add_option("--input", validate_options.input, "CoNLL-U treebank")
      ->required();
  validate->add_option("--fallback-doc-sentences",
                       validate_options.fallback_doc_sentences,
                       "document size when the input has no newdoc ids");
  validate->add_option("--grammar", validate_options.grammars,
                       "grammar weights file to check (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (transform->parsed()) {
      print_summary(run_transform(transform_options));
    } else if (freq->parsed()) {
      print_summary(run_freq(freq_options));
    } else if (train->parsed()) {
      train_options.lm.smoothing = smoothing_from_string(train_smoothing);
      train_options.split.part = split_part_from_string(train_split);
      print_summary(run_train(train_options));
    } else if (score->parsed()) {
      score_options.split.part = split_part_from_string(score_split);
      print_summary(run_score(score_options));
    } else if (import_cmd->parsed()) {
      print_summary(run_import(import_options));
    } else if (uid->parsed()) {
      uid_options.metric.filter = sentence_filter_from_string(uid_filter);
      if (uid_ci == "bootstrap") {
        uid_options.metric.ci_method = CIMethod::Bootstrap;
      } else if (uid_ci == "normal") {
        uid_options.metric.ci_method = CIMethod::Normal;
      } else {
        throw ConfigError("unknown --ci '" + uid_ci +
                          "' (expected bootstrap or normal)");
      }
      print_summary(run_uid(uid_options));
    } else if (regress->parsed()) {
      print_summary(run_regress(regress_options));
    } else if (report->parsed()) {
      print_summary(run_report(report_options));
    } else if (validate->parsed()) {
      ValidateSummary summary = run_validate(validate_options);
      for (const auto& note : summary.notes) std::cout << note << "\n";
      if (summary.parse_errors > 0)
        std::cout << summary.parse_errors << " malformed records\n";
      if (summary.tree_problems > 0)
        std::cout << summary.tree_problems << " trees with problems\n";
      for (const auto& problem : summary.problems)
        std::cout << "  " << problem << "\n";
      if (summary.used_fallback_docs)
        std::cout << "note: no document boundaries in input\n";
      std::cout << (summary.ok() ? "OK" : "PROBLEMS FOUND") << "\n";
      return summary.ok() ? 0 : 2;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
