#include "wordorder/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <utility>

#include <json.hpp>

#include "wordorder/corpus.hpp"
#include "wordorder/errors.hpp"
#include "wordorder/freq.hpp"
#include "wordorder/manifest.hpp"
#include "wordorder/surprisal_io.hpp"
#include "wordorder/util.hpp"

namespace wordorder {

namespace {

using std::filesystem::path;
using Settings = std::map<std::string, std::string>;

path manifest_for(const path& explicit_path, const path& primary_output) {
  if (!explicit_path.empty()) return explicit_path;
  path dir = primary_output.parent_path();
  if (dir.empty()) dir = ".";
  return dir / "manifest.json";
}

// User-supplied input: a missing path is a configuration problem.
void require_input(const path& p, const std::string& what) {
  if (p.empty()) throw ConfigError(what + " is required");
  if (!std::filesystem::exists(p))
    throw ConfigError(what + " '" + p.string() + "' does not exist");
}

// Pipeline artifact: a missing path means an upstream stage has not run.
void require_artifact(const path& p, const std::string& what,
                      const std::string& producing_stage) {
  if (p.empty()) throw ConfigError(what + " is required");
  if (!std::filesystem::exists(p))
    throw DataError(what + " '" + p.string() + "' not found; run " +
                    producing_stage + " first");
}

std::ifstream open_in(const path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read '" + p.string() + "'");
  return in;
}

std::ofstream open_out(const path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + p.string() + "'");
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string ratios_string(const std::vector<double>& ratios) {
  std::vector<std::string> parts;
  parts.reserve(ratios.size());
  for (double r : ratios) parts.push_back(format_double(r));
  return join(parts, ',');
}

void put_split(Settings& s, const SplitOptions& split) {
  s["split_part"] = std::to_string(split.part);
  s["split_ratios"] = ratios_string(split.ratios);
  s["split_seed"] = std::to_string(split.seed);
}

void validate_split(const SplitOptions& split) {
  if (split.part < 0) return;
  if (split.part >= static_cast<int>(split.ratios.size()))
    throw ConfigError("split part " + std::to_string(split.part) +
                      " needs at least " + std::to_string(split.part + 1) +
                      " ratios, got " + std::to_string(split.ratios.size()));
  (void)assign_split("probe", {split.ratios, split.seed});
}

}  // namespace

int split_part_from_string(const std::string& name) {
  if (name == "all") return -1;
  if (name == "train") return 0;
  if (name == "dev") return 1;
  if (name == "test") return 2;
  throw ConfigError("unknown split '" + name +
                    "' (expected train, dev, test or all)");
}

bool split_admits(const SplitOptions& split, const std::string& doc_id) {
  if (split.part < 0) return true;
  return assign_split(doc_id, {split.ratios, split.seed}) == split.part;
}

StageSummary run_transform(const TransformOptions& options) {
  require_input(options.input, "input treebank");
  if (options.out_dir.empty())
    throw ConfigError("an output directory is required");

  std::vector<Variant> variants;
  if (options.variants.empty()) {
    variants = all_variants();
  } else {
    std::set<Variant> seen;
    for (const auto& tag : options.variants) {
      Variant v = variant_from_string(tag);
      if (!seen.insert(v).second)
        throw ConfigError("variant '" + tag + "' listed twice");
      variants.push_back(v);
    }
  }

  const std::set<std::string> promo(options.promotion.begin(),
                                    options.promotion.end());

  // The config hash covers everything that determines output content; file
  // inputs enter by checksum so editing them changes the hash.
  Settings s;
  s["stage"] = "transform";
  s["language"] = options.language;
  s["input"] = file_checksum(options.input);
  {
    std::vector<std::string> tags;
    for (Variant v : variants) tags.push_back(variant_name(v));
    s["variants"] = join(tags, ',');
  }
  s["promotion"] = promo.empty() ? "(default)" : join(options.promotion, ',');
  s["budget"] = std::to_string(options.budget);
  s["seed"] = std::to_string(options.seed);
  s["strict"] = options.strict ? "true" : "false";
  s["fallback_doc_sentences"] = std::to_string(options.fallback_doc_sentences);

  const bool wants_min_dl =
      std::find(variants.begin(), variants.end(), Variant::MinDLOpt) !=
      variants.end();
  const bool fit_min_dl = wants_min_dl && options.min_dl_grammar.empty();

  struct Resource {
    Variant variant;
    const path* file;
    const char* key;
    const char* flag;
  };
  const Resource resources[] = {
      {Variant::Approx, &options.approx_grammar, "grammar_approx",
       "a grammar weights file"},
      {Variant::EfficientOV, &options.efficient_ov_grammar,
       "grammar_efficient_ov", "a grammar weights file"},
      {Variant::EfficientVO, &options.efficient_vo_grammar,
       "grammar_efficient_vo", "a grammar weights file"},
  };
  std::vector<std::string> input_names{options.input.string()};
  for (const auto& r : resources) {
    if (std::find(variants.begin(), variants.end(), r.variant) ==
        variants.end())
      continue;
    if (r.file->empty())
      throw ConfigError(variant_name(r.variant) + " needs " + r.flag);
    require_input(*r.file, "grammar file for " + variant_name(r.variant));
    s[r.key] = file_checksum(*r.file);
    input_names.push_back(r.file->string());
  }
  const bool wants_freq = std::any_of(variants.begin(), variants.end(),
                                      variant_needs_freq_table);
  if (wants_freq) {
    if (options.freq_table.empty())
      throw ConfigError(
          "Sort-Freq and Sort-Freq-Rev need a word-frequency table");
    require_input(options.freq_table, "frequency table");
    s["freq_table"] = file_checksum(options.freq_table);
    input_names.push_back(options.freq_table.string());
  }
  if (wants_min_dl && !options.min_dl_grammar.empty()) {
    require_input(options.min_dl_grammar, "grammar file for Min-DL-Opt");
    s["grammar_min_dl"] = file_checksum(options.min_dl_grammar);
    input_names.push_back(options.min_dl_grammar.string());
  } else if (fit_min_dl) {
    if (options.min_dl_sample < 1)
      throw ConfigError("the Min-DL-Opt fit needs a positive sample size");
    s["min_dl_iterations"] = std::to_string(options.min_dl_iterations);
    s["min_dl_restarts"] = std::to_string(options.min_dl_restarts);
    s["min_dl_sample"] = std::to_string(options.min_dl_sample);
  }
  const std::string hash = config_hash(s);

  StageSummary summary;
  summary.config_hash = hash;

  std::map<Variant, ConsistentGrammar> grammars;
  auto load_weights = [](const path& file, const std::string& name) {
    auto in = open_in(file);
    return load_grammar(in, name);
  };
  for (const auto& r : resources) {
    if (std::find(variants.begin(), variants.end(), r.variant) !=
        variants.end())
      grammars.emplace(r.variant,
                       load_weights(*r.file, variant_name(r.variant)));
  }
  const std::pair<Variant, int> random_variants[] = {
      {Variant::Random1, 1}, {Variant::Random2, 2}, {Variant::Random3, 3},
      {Variant::Random4, 4}, {Variant::Random5, 5},
  };
  for (const auto& [v, index] : random_variants) {
    if (std::find(variants.begin(), variants.end(), v) != variants.end())
      grammars.emplace(v, make_random_grammar(index));
  }
  std::optional<FreqTable> freqs;
  if (wants_freq) {
    auto in = open_in(options.freq_table);
    freqs = FreqTable::load(in);
  }

  std::filesystem::create_directories(options.out_dir);

  path fitted_file;
  if (wants_min_dl && !options.min_dl_grammar.empty()) {
    grammars.emplace(Variant::MinDLOpt,
                     load_weights(options.min_dl_grammar, "Min-DL-Opt"));
  } else if (fit_min_dl) {
    std::vector<DepTree> sample;
    auto in = open_in(options.input);
    ConlluReader reader(in,
                        {false, options.fallback_doc_sentences});
    const std::set<std::string>& promo_set =
        promo.empty() ? default_promotion_relations() : promo;
    while (static_cast<int>(sample.size()) < options.min_dl_sample) {
      auto tree = reader.next();
      if (!tree) break;
      if (!validate_tree(*tree).empty()) continue;
      try {
        sample.push_back(promote_function_heads(strip_punct(*tree), promo_set));
      } catch (const DataError&) {
        continue;  // punctuation-only sentence
      }
    }
    if (sample.empty())
      throw DataError("no usable sentences in '" + options.input.string() +
                      "' to fit the Min-DL-Opt grammar");
    OptimizeResult fit = optimize_min_dl_grammar(
        sample, {options.min_dl_iterations, options.min_dl_restarts,
                 static_cast<std::uint64_t>(options.seed)});
    summary.notes.push_back(
        "fitted Min-DL-Opt grammar on " + std::to_string(sample.size()) +
        " trees (mean dependency length " + format_double(fit.mean_dl) + ")");
    fitted_file = options.out_dir / "grammar.Min-DL-Opt.tsv";
    auto out = open_out(fitted_file);
    out << "# config_hash=" << hash << "\n";
    save_grammar(fit.grammar, out);
    if (!out) throw DataError("cannot write '" + fitted_file.string() + "'");
    grammars.emplace(Variant::MinDLOpt, std::move(fit.grammar));
  }

  const path manifest_path = manifest_for(options.manifest, options.out_dir /
                                                                "manifest.json");
  Manifest manifest = Manifest::load(manifest_path);

  struct Output {
    Variant variant;
    path file;
    std::ofstream stream;
    std::unique_ptr<RecordWriter> writer;
  };
  std::vector<Output> outputs;
  outputs.reserve(variants.size());
  for (Variant v : variants) {
    path file = options.out_dir / ("corpus." + variant_name(v) + ".jsonl");
    outputs.push_back(Output{v, file, open_out(file), nullptr});
    Output& out = outputs.back();  // reserve() above keeps this stable
    out.writer = std::make_unique<RecordWriter>(out.stream);
    out.writer->write_meta({{"config_hash", hash},
                            {"language", options.language},
                            {"seed", options.seed},
                            {"variant", variant_name(v)}});
  }

  auto in = open_in(options.input);
  ConlluReader reader(in, {options.strict, options.fallback_doc_sentences});
  std::optional<Subsampler> sampler;
  if (options.budget > 0) sampler.emplace(options.budget);

  VariantContext base_ctx;
  if (!promo.empty()) base_ctx.promotion_relations = &promo;
  if (freqs) base_ctx.freqs = &*freqs;

  std::string last_doc;
  bool have_doc = false;
  while (auto tree = reader.next()) {
    auto location = "document '" + tree->doc_id + "', sentence " +
                    std::to_string(tree->sent_idx);
    ValidationReport report = validate_tree(*tree);
    if (!report.empty()) {
      if (options.strict)
        throw DataError(location + ": " + describe(report.front()));
      ++summary.skipped;
      warn(location + " dropped: " + describe(report.front()));
      continue;
    }
    SentenceRecord real;
    try {
      real = apply_variant(*tree, Variant::Real, base_ctx);
    } catch (const DataError& e) {
      ++summary.skipped;
      warn(location + " dropped: " + e.what());
      continue;
    }
    if (sampler && !sampler->admit(real)) break;
    for (auto& out : outputs) {
      if (out.variant == Variant::Real) {
        out.writer->write(real);
        continue;
      }
      VariantContext ctx = base_ctx;
      auto git = grammars.find(out.variant);
      if (git != grammars.end()) ctx.grammar = &git->second;
      out.writer->write(apply_variant(*tree, out.variant, ctx));
    }
    ++summary.records;
    if (!have_doc || tree->doc_id != last_doc) {
      ++summary.documents;
      last_doc = tree->doc_id;
      have_doc = true;
    }
  }
  if (sampler) {
    sampler->finish();
    summary.notes.push_back(
        "subsampled " + std::to_string(sampler->emitted_words()) +
        " words across " + std::to_string(sampler->admitted_documents()) +
        " documents (budget " + std::to_string(options.budget) + ")");
  }
  summary.parse_errors = reader.errors().size();
  if (summary.parse_errors > 0)
    summary.notes.push_back(std::to_string(summary.parse_errors) +
                            " malformed records skipped");
  if (summary.skipped > 0)
    summary.notes.push_back(std::to_string(summary.skipped) +
                            " sentences dropped before transforming");
  if (reader.used_fallback_docs())
    summary.notes.push_back(
        "input has no document boundaries; grouped every " +
        std::to_string(options.fallback_doc_sentences) + " sentences");
  if (summary.records == 0)
    throw DataError("no usable sentences in '" + options.input.string() + "'");

  for (auto& out : outputs) {
    out.writer.reset();
    out.stream.close();
    if (out.stream.fail())
      throw DataError("cannot write '" + out.file.string() + "'");
  }
  for (const auto& out : outputs) {
    manifest.record(out.file.string(),
                    {file_checksum(out.file), hash, "transform", input_names});
    summary.outputs.push_back(out.file.string());
  }
  if (!fitted_file.empty()) {
    manifest.record(fitted_file.string(), {file_checksum(fitted_file), hash,
                                           "transform",
                                           {options.input.string()}});
    summary.outputs.push_back(fitted_file.string());
  }
  manifest.save(manifest_path);
  return summary;
}

StageSummary run_freq(const FreqOptions& options) {
  require_artifact(options.corpus, "corpus", "transform");
  if (options.out.empty()) throw ConfigError("an output path is required");
  const path manifest_path = manifest_for(options.manifest, options.out);
  Manifest manifest = Manifest::load(manifest_path);
  manifest.require_fresh(options.corpus.string());

  Settings s;
  s["stage"] = "freq";
  s["corpus"] = file_checksum(options.corpus);
  const std::string hash = config_hash(s);

  StageSummary summary;
  summary.config_hash = hash;
  FreqTable freqs;
  {
    auto in = open_in(options.corpus);
    RecordReader reader(in);
    std::string last_doc;
    bool have_doc = false;
    while (auto record = reader.next()) {
      freqs.add_sentence(record->words);
      ++summary.records;
      if (!have_doc || record->doc_id != last_doc) {
        ++summary.documents;
        last_doc = record->doc_id;
        have_doc = true;
      }
    }
  }
  if (summary.records == 0)
    throw DataError("corpus '" + options.corpus.string() + "' is empty");
  {
    auto out = open_out(options.out);
    out << "# config_hash=" << hash << "\n";
    freqs.save(out);
    out.close();
    if (out.fail())
      throw DataError("cannot write '" + options.out.string() + "'");
  }
  summary.outputs.push_back(options.out.string());
  summary.notes.push_back(std::to_string(freqs.distinct()) +
                          " distinct words, " + std::to_string(freqs.total()) +
                          " total");
  manifest.record(options.out.string(), {file_checksum(options.out), hash,
                                         "freq",
                                         {options.corpus.string()}});
  manifest.save(manifest_path);
  return summary;
}

StageSummary run_train(const TrainOptions& options) {
  require_artifact(options.corpus, "corpus", "transform");
  if (options.model.empty()) throw ConfigError("a model path is required");
  options.lm.validate();
  validate_split(options.split);
  const path manifest_path = manifest_for(options.manifest, options.model);
  Manifest manifest = Manifest::load(manifest_path);
  manifest.require_fresh(options.corpus.string());

  Settings s;
  s["stage"] = "train";
  s["corpus"] = file_checksum(options.corpus);
  s["order"] = std::to_string(options.lm.order);
  s["smoothing"] = smoothing_name(options.lm.smoothing);
  s["discount"] = format_double(options.lm.discount);
  s["alpha"] = format_double(options.lm.alpha);
  s["unk_min_count"] = std::to_string(options.lm.unk_min_count);
  put_split(s, options.split);
  const std::string hash = config_hash(s);

  StageSummary summary;
  summary.config_hash = hash;
  NGramTrainer trainer(options.lm);
  {
    auto in = open_in(options.corpus);
    RecordReader reader(in);
    while (auto record = reader.next())
      if (split_admits(options.split, record->doc_id))
        trainer.count_vocab(*record);
  }
  trainer.finish_vocab();
  {
    auto in = open_in(options.corpus);
    RecordReader reader(in);
    std::string last_doc;
    bool have_doc = false;
    while (auto record = reader.next()) {
      if (!split_admits(options.split, record->doc_id)) continue;
      trainer.count_ngrams(*record);
      ++summary.records;
      if (!have_doc || record->doc_id != last_doc) {
        ++summary.documents;
        last_doc = record->doc_id;
        have_doc = true;
      }
    }
  }
  NGramModel model = trainer.finish();
  {
    auto out = open_out(options.model);
    model.save(out, "config_hash=" + hash);
    out.close();
    if (out.fail())
      throw DataError("cannot write '" + options.model.string() + "'");
  }
  summary.outputs.push_back(options.model.string());
  summary.notes.push_back(
      "order-" + std::to_string(model.config().order) + " " +
      smoothing_name(model.config().smoothing) + " model, " +
      std::to_string(model.event_count()) + " predictable events");
  manifest.record(options.model.string(), {file_checksum(options.model), hash,
                                           "train",
                                           {options.corpus.string()}});
  manifest.save(manifest_path);
  return summary;
}

StageSummary run_score(const ScoreOptions& options) {
  require_artifact(options.corpus, "corpus", "transform");
  require_artifact(options.model, "model", "train");
  if (options.out.empty()) throw ConfigError("an output path is required");
  validate_split(options.split);
  const path manifest_path = manifest_for(options.manifest, options.out);
  Manifest manifest = Manifest::load(manifest_path);
  manifest.require_fresh(options.corpus.string());
  manifest.require_fresh(options.model.string());

  Settings s;
  s["stage"] = "score";
  s["corpus"] = file_checksum(options.corpus);
  s["model"] = file_checksum(options.model);
  put_split(s, options.split);
  const std::string hash = config_hash(s);

  NGramModel model = [&] {
    auto in = open_in(options.model);
    return NGramModel::load(in);
  }();

  StageSummary summary;
  summary.config_hash = hash;
  {
    auto in = open_in(options.corpus);
    RecordReader reader(in);
    auto out = open_out(options.out);
    SurprisalWriter writer(out);
    writer.write_comment("config_hash=" + hash);
    ScoreSession session(model);
    std::string last_doc;
    bool have_doc = false;
    while (auto record = reader.next()) {
      if (!split_admits(options.split, record->doc_id)) {
        ++summary.skipped;
        continue;
      }
      writer.write(*record, session.score(*record));
      ++summary.records;
      if (!have_doc || record->doc_id != last_doc) {
        ++summary.documents;
        last_doc = record->doc_id;
        have_doc = true;
      }
    }
    out.close();
    if (out.fail())
      throw DataError("cannot write '" + options.out.string() + "'");
  }
  if (summary.records == 0)
    throw DataError("no sentences to score in '" + options.corpus.string() +
                    "'");
  summary.outputs.push_back(options.out.string());
  manifest.record(options.out.string(),
                  {file_checksum(options.out), hash, "score",
                   {options.corpus.string(), options.model.string()}});
  manifest.save(manifest_path);
  return summary;
}

StageSummary run_import(const ImportOptions& options) {
  require_artifact(options.corpus, "corpus", "transform");
  require_input(options.rows, "surprisal rows file");
  if (options.out.empty()) throw ConfigError("an output path is required");
  const path manifest_path = manifest_for(options.manifest, options.out);
  Manifest manifest = Manifest::load(manifest_path);
  manifest.require_fresh(options.corpus.string());

  Settings s;
  s["stage"] = "import";
  s["corpus"] = file_checksum(options.corpus);
  s["rows"] = file_checksum(options.rows);
  const std::string hash = config_hash(s);

  StageSummary summary;
  summary.config_hash = hash;
  {
    auto corpus_in = open_in(options.corpus);
    auto rows_in = open_in(options.rows);
    RecordReader reader(corpus_in);
    SurprisalImporter importer(rows_in);
    auto out = open_out(options.out);
    SurprisalWriter writer(out);
    writer.write_comment("config_hash=" + hash);
    std::string last_doc;
    bool have_doc = false;
    while (auto record = reader.next()) {
      writer.write(*record, importer.next(*record));
      ++summary.records;
      if (!have_doc || record->doc_id != last_doc) {
        ++summary.documents;
        last_doc = record->doc_id;
        have_doc = true;
      }
    }
    importer.finish();
    out.close();
    if (out.fail())
      throw DataError("cannot write '" + options.out.string() + "'");
  }
  if (summary.records == 0)
    throw DataError("corpus '" + options.corpus.string() + "' is empty");
  summary.outputs.push_back(options.out.string());
  manifest.record(options.out.string(),
                  {file_checksum(options.out), hash, "import",
                   {options.corpus.string(), options.rows.string()}});
  manifest.save(manifest_path);
  return summary;
}

StageSummary run_uid(const UidOptions& options) {
  require_artifact(options.surprisal, "surprisal file", "score");
  if (options.runs.empty()) throw ConfigError("a runs file is required");
  if (options.language.empty() ||
      options.language.find(',') != std::string::npos)
    throw ConfigError("language label must be non-empty and comma-free");
  if (options.dataset_size.empty() ||
      options.dataset_size.find(',') != std::string::npos)
    throw ConfigError("dataset size label must be non-empty and comma-free");
  (void)variant_from_string(options.variant);
  options.metric.validate();
  const path manifest_path = manifest_for(options.manifest, options.runs);
  Manifest manifest = Manifest::load(manifest_path);
  manifest.require_fresh(options.surprisal.string());

  Settings s;
  s["stage"] = "uid";
  s["surprisal"] = file_checksum(options.surprisal);
  s["language"] = options.language;
  s["variant"] = options.variant;
  s["dataset_size"] = options.dataset_size;
  s["seed"] = std::to_string(options.seed);
  s["k"] = format_double(options.metric.k);
  s["filter"] = sentence_filter_name(options.metric.filter);
  s["ci"] = options.metric.ci_method == CIMethod::Bootstrap ? "bootstrap"
                                                            : "normal";
  s["bootstrap_resamples"] = std::to_string(options.metric.bootstrap_resamples);
  s["bootstrap_seed"] = std::to_string(options.metric.bootstrap_seed);
  const std::string hash = config_hash(s);

  std::vector<SurprisalRecord> scores;
  {
    auto in = open_in(options.surprisal);
    scores = read_surprisal_records(in);
  }
  if (scores.empty())
    throw DataError("surprisal file '" + options.surprisal.string() +
                    "' has no rows");

  StageSummary summary;
  summary.config_hash = hash;
  summary.records = scores.size();

  RunRecord row;
  row.language = options.language;
  row.variant = options.variant;
  row.dataset_size = options.dataset_size;
  row.seed = options.seed;
  row.mean_surprisal = mean_surprisal(scores, Granularity::PerWord);
  const double per_sentence = mean_surprisal(scores, Granularity::PerSentence);

  std::vector<LanguageEstimate> estimates;
  estimates.push_back(language_uid(scores, Metric::UidV, options.metric));
  estimates.push_back(language_uid(scores, Metric::UidLv, options.metric));
  estimates.push_back(language_uid(scores, Metric::UidP, options.metric));
  row.uid_v = estimates[0].estimate;
  row.uid_lv = estimates[1].estimate;
  row.uid_p = estimates[2].estimate;
  for (const auto& est : estimates) {
    std::string line = est.metric + " = " + format_double(est.estimate) +
                       " [" + format_double(est.ci_low) + ", " +
                       format_double(est.ci_high) + "] over " +
                       std::to_string(est.n_sentences) + " sentences";
    if (est.skipped > 0)
      line += " (" + std::to_string(est.skipped) + " length-1 skipped)";
    summary.notes.push_back(std::move(line));
  }
  summary.notes.push_back("mean surprisal " +
                          format_double(row.mean_surprisal) + " bits/word, " +
                          format_double(per_sentence) + " bits/sentence");

  std::vector<RunRecord> rows;
  if (std::filesystem::exists(options.runs)) {
    auto in = open_in(options.runs);
    rows = read_run_records(in);
  }
  upsert_run_record(rows, row);
  {
    auto out = open_out(options.runs);
    out << "# config_hash=" << hash << "\n";
    out << "# mean_surprisal=per-word\n";
    write_run_records(out, std::move(rows));
    out.close();
    if (out.fail())
      throw DataError("cannot write '" + options.runs.string() + "'");
  }
  summary.outputs.push_back(options.runs.string());
  manifest.record(options.runs.string(),
                  {file_checksum(options.runs), hash, "uid",
                   {options.surprisal.string()}});

  if (!options.metrics_out.empty()) {
    auto out = open_out(options.metrics_out);
    out << "# config_hash=" << hash << "\n";
    out << "language,variant,metric,estimate,ci_low,ci_high,n_sentences,"
           "filter\n";
    const std::string prefix = options.language + "," + options.variant + ",";
    const std::string filter = sentence_filter_name(options.metric.filter);
    for (const auto& est : estimates)
      out << prefix << est.metric << "," << format_double(est.estimate) << ","
          << format_double(est.ci_low) << "," << format_double(est.ci_high)
          << "," << est.n_sentences << "," << filter << "\n";
    out << prefix << "mean_surprisal_per_word,"
        << format_double(row.mean_surprisal) << ","
        << format_double(row.mean_surprisal) << ","
        << format_double(row.mean_surprisal) << "," << scores.size()
        << ",all\n";
    out << prefix << "mean_surprisal_per_sentence,"
        << format_double(per_sentence) << "," << format_double(per_sentence)
        << "," << format_double(per_sentence) << "," << scores.size()
        << ",all\n";
    out.close();
    if (out.fail())
      throw DataError("cannot write '" + options.metrics_out.string() + "'");
    summary.outputs.push_back(options.metrics_out.string());
    manifest.record(options.metrics_out.string(),
                    {file_checksum(options.metrics_out), hash, "uid",
                     {options.surprisal.string()}});
  }
  manifest.save(manifest_path);
  return summary;
}

StageSummary run_regress(const RegressOptions& options) {
  require_artifact(options.runs, "runs file", "uid");
  if (options.out.empty()) throw ConfigError("an output path is required");
  const path manifest_path = manifest_for(options.manifest, options.out);
  Manifest manifest = Manifest::load(manifest_path);
  manifest.require_fresh(options.runs.string());

  Settings s;
  s["stage"] = "regress";
  s["runs"] = file_checksum(options.runs);
  s["reference"] = options.reference;
  const std::string hash = config_hash(s);

  std::vector<RunRecord> rows;
  {
    auto in = open_in(options.runs);
    rows = read_run_records(in);
  }
  auto fits = regress_by_language(rows, options.reference);

  StageSummary summary;
  summary.config_hash = hash;
  summary.records = rows.size();
  {
    auto out = open_out(options.out);
    out << "# config_hash=" << hash << "\n";
    out << "# reference=" << options.reference << "\n";
    out << "# response=uid_p\n";
    write_coefficients_csv(out, fits);
    out.close();
    if (out.fail())
      throw DataError("cannot write '" + options.out.string() + "'");
  }
  for (const auto& [language, fit] : fits)
    summary.notes.push_back(language + ": n=" + std::to_string(fit.n) +
                            ", r_squared=" + format_double(fit.r_squared));
  summary.outputs.push_back(options.out.string());
  manifest.record(options.out.string(), {file_checksum(options.out), hash,
                                         "regress",
                                         {options.runs.string()}});
  manifest.save(manifest_path);
  return summary;
}

StageSummary run_report(const ReportStageOptions& options) {
  require_artifact(options.runs, "runs file", "uid");
  if (options.out.empty()) throw ConfigError("an output path is required");
  const path manifest_path = manifest_for(options.manifest, options.out);
  Manifest manifest = Manifest::load(manifest_path);
  manifest.require_fresh(options.runs.string());

  ReportOptions report_options;
  report_options.bootstrap_resamples = options.bootstrap_resamples;
  report_options.bootstrap_seed = options.bootstrap_seed;
  if (!options.comparisons.empty()) {
    for (const auto& item : split(options.comparisons, ',')) {
      auto pair = split(item, ':');
      if (pair.size() != 2 || pair[0].empty() || pair[1].empty())
        throw ConfigError("comparison '" + std::string(item) +
                          "' must look like First:Second");
      report_options.comparisons.emplace_back(std::string(pair[0]),
                                              std::string(pair[1]));
    }
  }

  Settings s;
  s["stage"] = "report";
  s["runs"] = file_checksum(options.runs);
  s["comparisons"] = options.comparisons;
  s["bootstrap_resamples"] = std::to_string(options.bootstrap_resamples);
  s["bootstrap_seed"] = std::to_string(options.bootstrap_seed);
  const std::string hash = config_hash(s);

  std::vector<RunRecord> rows;
  {
    auto in = open_in(options.runs);
    rows = read_run_records(in);
  }
  Report report = variant_report(rows, report_options);

  StageSummary summary;
  summary.config_hash = hash;
  summary.records = rows.size();
  {
    auto out = open_out(options.out);
    out << "# config_hash=" << hash << "\n";
    write_report_csv(out, report);
    out.close();
    if (out.fail())
      throw DataError("cannot write '" + options.out.string() + "'");
  }
  summary.outputs.push_back(options.out.string());
  manifest.record(options.out.string(), {file_checksum(options.out), hash,
                                         "report",
                                         {options.runs.string()}});
  summary.notes.push_back(std::to_string(report.groups.size()) +
                          " summary rows");
  if (!options.comparisons_out.empty()) {
    auto out = open_out(options.comparisons_out);
    out << "# config_hash=" << hash << "\n";
    write_comparisons_csv(out, report);
    out.close();
    if (out.fail())
      throw DataError("cannot write '" + options.comparisons_out.string() +
                      "'");
    summary.outputs.push_back(options.comparisons_out.string());
    manifest.record(options.comparisons_out.string(),
                    {file_checksum(options.comparisons_out), hash, "report",
                     {options.runs.string()}});
    summary.notes.push_back(std::to_string(report.comparisons.size()) +
                            " sign-test rows");
  }
  manifest.save(manifest_path);
  return summary;
}

ValidateSummary run_validate(const ValidateOptions& options) {
  require_input(options.input, "input treebank");
  ValidateSummary summary;
  constexpr std::size_t kMaxSamples = 20;
  auto in = open_in(options.input);
  ConlluReader reader(in, {false, options.fallback_doc_sentences});
  std::string last_doc;
  bool have_doc = false;
  while (auto tree = reader.next()) {
    ++summary.sentences;
    summary.tokens += static_cast<std::uint64_t>(tree->size());
    if (!have_doc || tree->doc_id != last_doc) {
      ++summary.documents;
      last_doc = tree->doc_id;
      have_doc = true;
    }
    ValidationReport report = validate_tree(*tree);
    if (report.empty()) continue;
    ++summary.tree_problems;
    for (const auto& problem : report) {
      if (summary.problems.size() >= kMaxSamples) break;
      summary.problems.push_back("document '" + tree->doc_id +
                                 "', sentence " +
                                 std::to_string(tree->sent_idx) + ": " +
                                 describe(problem));
    }
  }
  summary.parse_errors = reader.errors().size();
  for (const auto& error : reader.errors()) {
    if (summary.problems.size() >= kMaxSamples) break;
    summary.problems.push_back("line " + std::to_string(error.line) + ": " +
                               error.message);
  }
  summary.used_fallback_docs = reader.used_fallback_docs();
  for (const auto& file : options.grammars) {
    require_input(file, "grammar file");
    auto gin = open_in(file);
    ConsistentGrammar grammar = load_grammar(gin, file.string());
    summary.notes.push_back("grammar '" + file.string() + "': " +
                            std::to_string(grammar.weights().size()) +
                            " relation weights");
  }
  summary.notes.push_back(std::to_string(summary.sentences) +
                          " sentences in " +
                          std::to_string(summary.documents) + " documents, " +
                          std::to_string(summary.tokens) + " tokens");
  return summary;
}

}  // namespace wordorder
