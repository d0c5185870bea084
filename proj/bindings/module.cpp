// Python face of the toolkit: the pipeline stages plus the sentence-level
// metrics, with keyword arguments mirroring the command-line flags.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "wordorder/corpus.hpp"
#include "wordorder/errors.hpp"
#include "wordorder/ngram.hpp"
#include "wordorder/pipeline.hpp"
#include "wordorder/uid.hpp"

namespace py = pybind11;
using namespace wordorder;

namespace {

py::dict to_dict(const StageSummary& s) {
  py::dict d;
  d["outputs"] = s.outputs;
  d["records"] = s.records;
  d["documents"] = s.documents;
  d["skipped"] = s.skipped;
  d["parse_errors"] = s.parse_errors;
  d["config_hash"] = s.config_hash;
  d["notes"] = s.notes;
  return d;
}

SplitOptions make_split(const std::string& part,
                        const std::vector<double>& ratios,
                        std::uint64_t seed) {
  SplitOptions split;
  split.part = split_part_from_string(part);
  split.ratios = ratios;
  split.seed = seed;
  return split;
}

}  // namespace

PYBIND11_MODULE(_wordorder, m) {
  m.doc() =
      "Rewrites dependency treebanks under counterfactual word orders and "
      "measures how evenly the resulting text spreads information.";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

  m.def(
      "variants",
      [] {
        std::vector<std::string> names;
        for (Variant v : all_variants()) names.push_back(variant_name(v));
        return names;
      },
      "The fourteen corpus variant tags, canonical order.");

  m.def("uid_v", &uid_v, py::arg("surprisals"),
        "Within-sentence surprisal variance in bits^2 (EOS excluded).");
  m.def("uid_lv", &uid_lv, py::arg("surprisals"),
        "Mean squared word-to-word surprisal change in bits^2.");
  m.def("uid_p", &uid_p, py::arg("surprisals"), py::arg("k") = 1.25,
        "Power sum of word surprisals with exponent k.");

  m.def(
      "transform",
      [](const std::filesystem::path& input,
         const std::filesystem::path& out_dir, const std::string& language,
         const std::vector<std::string>& variants,
         const std::optional<std::filesystem::path>& grammar_approx,
         const std::optional<std::filesystem::path>& grammar_efficient_ov,
         const std::optional<std::filesystem::path>& grammar_efficient_vo,
         const std::optional<std::filesystem::path>& grammar_min_dl,
         const std::optional<std::filesystem::path>& freq_table,
         const std::vector<std::string>& promotion, std::uint64_t budget,
         long long seed, bool strict, int fallback_doc_sentences,
         int min_dl_iterations, int min_dl_restarts, int min_dl_sample,
         const std::optional<std::filesystem::path>& manifest) {
        TransformOptions o;
        o.input = input;
        o.out_dir = out_dir;
        o.language = language;
        o.variants = variants;
        o.approx_grammar = grammar_approx.value_or(std::filesystem::path{});
        o.efficient_ov_grammar = grammar_efficient_ov.value_or(std::filesystem::path{});
        o.efficient_vo_grammar = grammar_efficient_vo.value_or(std::filesystem::path{});
        o.min_dl_grammar = grammar_min_dl.value_or(std::filesystem::path{});
        o.freq_table = freq_table.value_or(std::filesystem::path{});
        o.promotion = promotion;
        o.budget = budget;
        o.seed = seed;
        o.strict = strict;
        o.fallback_doc_sentences = fallback_doc_sentences;
        o.min_dl_iterations = min_dl_iterations;
        o.min_dl_restarts = min_dl_restarts;
        o.min_dl_sample = min_dl_sample;
        o.manifest = manifest.value_or(std::filesystem::path{});
        return to_dict(run_transform(o));
      },
      py::arg("input"), py::arg("out_dir"), py::arg("language") = "und",
      py::arg("variants") = std::vector<std::string>{},
      py::arg("grammar_approx") = std::nullopt,
      py::arg("grammar_efficient_ov") = std::nullopt,
      py::arg("grammar_efficient_vo") = std::nullopt,
      py::arg("grammar_min_dl") = std::nullopt,
      py::arg("freq_table") = std::nullopt,
      py::arg("promotion") = std::vector<std::string>{},
      py::arg("budget") = 0, py::arg("seed") = 0, py::arg("strict") = false,
      py::arg("fallback_doc_sentences") = 0,
      py::arg("min_dl_iterations") = 300, py::arg("min_dl_restarts") = 3,
      py::arg("min_dl_sample") = 200,
      py::arg("manifest") = std::nullopt,
      "Rewrite a CoNLL-U treebank under the requested variants (default: "
      "all fourteen), one JSONL corpus per variant.");

  m.def(
      "freq",
      [](const std::filesystem::path& corpus, const std::filesystem::path& out,
         const std::optional<std::filesystem::path>& manifest) {
        FreqOptions o;
        o.corpus = corpus;
        o.out = out;
        o.manifest = manifest.value_or(std::filesystem::path{});
        return to_dict(run_freq(o));
      },
      py::arg("corpus"), py::arg("out"),
      py::arg("manifest") = std::nullopt,
      "Count word frequencies in a JSONL corpus.");

  m.def(
      "train",
      [](const std::filesystem::path& corpus,
         const std::filesystem::path& model, int order,
         const std::string& smoothing, double discount, double alpha,
         int unk_min_count, const std::string& split,
         const std::vector<double>& split_ratios, std::uint64_t split_seed,
         const std::optional<std::filesystem::path>& manifest) {
        TrainOptions o;
        o.corpus = corpus;
        o.model = model;
        o.lm.order = order;
        o.lm.smoothing = smoothing_from_string(smoothing);
        o.lm.discount = discount;
        o.lm.alpha = alpha;
        o.lm.unk_min_count = unk_min_count;
        o.split = make_split(split, split_ratios, split_seed);
        o.manifest = manifest.value_or(std::filesystem::path{});
        return to_dict(run_train(o));
      },
      py::arg("corpus"), py::arg("model"), py::arg("order") = 4,
      py::arg("smoothing") = "interpolated-kn", py::arg("discount") = 0.75,
      py::arg("alpha") = 1.0, py::arg("unk_min_count") = 2,
      py::arg("split") = "all",
      py::arg("split_ratios") = std::vector<double>{0.8, 0.1, 0.1},
      py::arg("split_seed") = 0,
      py::arg("manifest") = std::nullopt,
      "Train an n-gram language model on a corpus (optionally one split "
      "part).");

  m.def(
      "score",
      [](const std::filesystem::path& corpus,
         const std::filesystem::path& model, const std::filesystem::path& out,
         const std::string& split, const std::vector<double>& split_ratios,
         std::uint64_t split_seed, const std::optional<std::filesystem::path>& manifest) {
        ScoreOptions o;
        o.corpus = corpus;
        o.model = model;
        o.out = out;
        o.split = make_split(split, split_ratios, split_seed);
        o.manifest = manifest.value_or(std::filesystem::path{});
        return to_dict(run_score(o));
      },
      py::arg("corpus"), py::arg("model"), py::arg("out"),
      py::arg("split") = "all",
      py::arg("split_ratios") = std::vector<double>{0.8, 0.1, 0.1},
      py::arg("split_seed") = 0,
      py::arg("manifest") = std::nullopt,
      "Score a corpus with a trained model, one surprisal row per word.");

  m.def(
      "import_surprisal",
      [](const std::filesystem::path& corpus,
         const std::filesystem::path& rows, const std::filesystem::path& out,
         const std::optional<std::filesystem::path>& manifest) {
        ImportOptions o;
        o.corpus = corpus;
        o.rows = rows;
        o.out = out;
        o.manifest = manifest.value_or(std::filesystem::path{});
        return to_dict(run_import(o));
      },
      py::arg("corpus"), py::arg("rows"), py::arg("out"),
      py::arg("manifest") = std::nullopt,
      "Align externally computed (possibly sub-word) surprisal rows to a "
      "corpus, summing pieces per word.");

  m.def(
      "uid",
      [](const std::filesystem::path& surprisal, const std::string& language,
         const std::string& variant, const std::string& dataset_size,
         long long seed, const std::filesystem::path& runs,
         const std::optional<std::filesystem::path>& metrics_out, double k,
         const std::string& filter, const std::string& ci, int resamples,
         std::uint64_t bootstrap_seed, const std::optional<std::filesystem::path>& manifest) {
        UidOptions o;
        o.surprisal = surprisal;
        o.language = language;
        o.variant = variant;
        o.dataset_size = dataset_size;
        o.seed = seed;
        o.runs = runs;
        o.metrics_out = metrics_out.value_or(std::filesystem::path{});
        o.metric.k = k;
        o.metric.filter = sentence_filter_from_string(filter);
        if (ci == "bootstrap") {
          o.metric.ci_method = CIMethod::Bootstrap;
        } else if (ci == "normal") {
          o.metric.ci_method = CIMethod::Normal;
        } else {
          throw ConfigError("unknown ci method '" + ci +
                            "' (expected bootstrap or normal)");
        }
        o.metric.bootstrap_resamples = resamples;
        o.metric.bootstrap_seed = bootstrap_seed;
        o.manifest = manifest.value_or(std::filesystem::path{});
        return to_dict(run_uid(o));
      },
      py::arg("surprisal"), py::arg("language"), py::arg("variant"),
      py::arg("dataset_size"), py::arg("seed"), py::arg("runs"),
      py::arg("metrics_out") = std::nullopt, py::arg("k") = 1.25,
      py::arg("filter") = "all", py::arg("ci") = "bootstrap",
      py::arg("resamples") = 2000, py::arg("bootstrap_seed") = 2024,
      py::arg("manifest") = std::nullopt,
      "Compute the information-density metrics for one scored run and "
      "upsert the row into the run table.");

  m.def(
      "regress",
      [](const std::filesystem::path& runs, const std::filesystem::path& out,
         const std::string& reference,
         const std::optional<std::filesystem::path>& manifest) {
        RegressOptions o;
        o.runs = runs;
        o.out = out;
        o.reference = reference;
        o.manifest = manifest.value_or(std::filesystem::path{});
        return to_dict(run_regress(o));
      },
      py::arg("runs"), py::arg("out"), py::arg("reference") = "Real",
      py::arg("manifest") = std::nullopt,
      "Treatment-coded least squares of uid_p on variant, size, and mean "
      "surprisal, per language.");

  m.def(
      "report",
      [](const std::filesystem::path& runs, const std::filesystem::path& out,
         const std::string& comparisons,
         const std::optional<std::filesystem::path>& comparisons_out, int resamples,
         std::uint64_t bootstrap_seed, const std::optional<std::filesystem::path>& manifest) {
        ReportStageOptions o;
        o.runs = runs;
        o.out = out;
        o.comparisons = comparisons;
        o.comparisons_out = comparisons_out.value_or(std::filesystem::path{});
        o.bootstrap_resamples = resamples;
        o.bootstrap_seed = bootstrap_seed;
        o.manifest = manifest.value_or(std::filesystem::path{});
        return to_dict(run_report(o));
      },
      py::arg("runs"), py::arg("out"), py::arg("comparisons") = "",
      py::arg("comparisons_out") = std::nullopt,
      py::arg("resamples") = 2000, py::arg("bootstrap_seed") = 2024,
      py::arg("manifest") = std::nullopt,
      "Group summaries with bootstrap intervals, plus paired sign tests "
      "for \"First:Second\" comparisons.");

  m.def(
      "validate",
      [](const std::filesystem::path& input, int fallback_doc_sentences,
         const std::vector<std::filesystem::path>& grammars) {
        ValidateOptions o;
        o.input = input;
        o.fallback_doc_sentences = fallback_doc_sentences;
        o.grammars = grammars;
        ValidateSummary s = run_validate(o);
        py::dict d;
        d["ok"] = s.ok();
        d["sentences"] = s.sentences;
        d["documents"] = s.documents;
        d["tokens"] = s.tokens;
        d["parse_errors"] = s.parse_errors;
        d["tree_problems"] = s.tree_problems;
        d["used_fallback_docs"] = s.used_fallback_docs;
        d["problems"] = s.problems;
        d["notes"] = s.notes;
        return d;
      },
      py::arg("input"), py::arg("fallback_doc_sentences") = 0,
      py::arg("grammars") = std::vector<std::filesystem::path>{},
      "Check a CoNLL-U treebank (and optional grammar weight files) "
      "without writing anything.");
}
