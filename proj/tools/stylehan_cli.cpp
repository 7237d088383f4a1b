// stylehan: command-line front end (train, eval, predict, ablate, sweep,
// gradcheck, synth, tag). Exit codes: 0 success, 1 runtime failure, 2 usage.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "stylehan/checkpoint.hpp"
#include "stylehan/config.hpp"
#include "stylehan/embeddings.hpp"
#include "stylehan/model_check.hpp"
#include "stylehan/pipeline.hpp"
#include "stylehan/synth.hpp"
#include "stylehan/tagger.hpp"
#include "stylehan/trainer.hpp"

using namespace stylehan;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Bad flag values that only show up after parsing; reported like parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kModeNames = {"style", "lexical", "syntactic", "combined-embed"};

std::string dashed(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return key;
}

// Model/training flags layered over --preset and --config.
struct SettingFlags {
  std::string preset, config;
  bool freeze_lexical = false;
  bool quiet = false;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  CLI::Option* freeze = nullptr;

  void attach(CLI::App* cmd, bool with_mode = true) {
    cmd->add_option("--preset", preset, "Dataset preset (ccat: 30 words/sentence, blogs: 20)")
        ->check(CLI::IsMember({"ccat", "blogs"}));
    cmd->add_option("--config", config, "key = value settings file")->check(CLI::ExistingFile);
    static const std::vector<std::pair<std::string, std::string>> keys = {
        {"sentences_per_doc", "Sentences per document (M)"},
        {"words_per_sentence", "Words per sentence (N)"},
        {"d_w", "Lexical embedding size"},
        {"d_p", "Syntactic embedding size"},
        {"receptive_fields", "Convolution widths, comma separated"},
        {"filters_per_size", "Filters per width"},
        {"lstm_hidden", "LSTM hidden size per direction"},
        {"attention_dim", "Attention projection size"},
        {"batch_size", "Mini-batch size"},
        {"epochs", "Training epochs"},
        {"learning_rate", "Nadam learning rate"},
        {"beta1", "Nadam beta1"},
        {"beta2", "Nadam beta2"},
        {"epsilon", "Nadam epsilon"},
        {"l2", "L2 coefficient"},
        {"l2_power", "1: lambda*||theta||, 2: lambda*||theta||^2"},
        {"seed", "Random seed"},
        {"runs", "Runs of the split/train/evaluate protocol"},
        {"val_fraction", "Validation fraction"},
        {"vocab_limit", "Most frequent words kept"}};
    for (const auto& [key, help] : keys) {
      CLI::Option* opt = cmd->add_option("--" + dashed(key), values[key], help);
      if (key == "l2_power") opt->check(CLI::IsMember({"1", "2"}));
      options.emplace_back(key, opt);
    }
    if (with_mode) {
      options.emplace_back("mode", cmd->add_option("--mode", values["mode"], "Model variant")
                                       ->check(CLI::IsMember(kModeNames)));
    }
    freeze = cmd->add_flag("--freeze-lexical", freeze_lexical, "Keep the lexical embeddings fixed");
    cmd->add_flag("--quiet", quiet, "No progress output");
  }

  Settings resolve() const {
    Settings s;
    try {
      if (!preset.empty()) s.model = ModelConfig::preset(preset);
      if (!config.empty()) apply_config_file(s, config);
      for (const auto& [key, opt] : options)
        if (opt->count() > 0) apply_setting(s, key, values.at(key));
      if (freeze->count() > 0) s.model.freeze_lexical = freeze_lexical;
      s.train.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return s;
  }
};

struct DataFlags {
  std::string data, tagged, tagger;

  void attach(CLI::App* cmd, const std::string& what = "data") {
    cmd->add_option("--" + what, data, "Dataset: JSON lines {author, text} or a directory of author/*.txt")
        ->required()
        ->check(CLI::ExistingPath);
    cmd->add_option("--" + what + "-tagged", tagged, "Pre-tagged documents in the same order (skips the tagger)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--tagger", tagger, "Saved tagger model (default: trained on the bundled corpus)")
        ->check(CLI::ExistingFile);
  }
};

PerceptronTagger load_tagger(const std::string& path) {
  if (!path.empty()) return PerceptronTagger::load(path);
  return default_tagger();
}

LabeledCorpus load_corpus(const std::string& data, const std::string& tagged_path, const std::string& tagger_path) {
  const std::vector<RawDocument> raw = read_dataset(data);
  if (raw.empty()) throw std::runtime_error("dataset '" + data + "' has no documents");
  std::vector<TaggedDocument> tagged;
  if (!tagged_path.empty()) {
    tagged = read_tagged_documents(tagged_path);
  } else {
    const PerceptronTagger tagger = load_tagger(tagger_path);
    for (const auto& doc : raw) tagged.push_back(tag_text(tagger, doc.text));
  }
  return label_corpus(raw, std::move(tagged));
}

LabeledCorpus load_corpus(const DataFlags& f) { return load_corpus(f.data, f.tagged, f.tagger); }

// Labels under a fixed author list (from a checkpoint).
std::vector<std::size_t> labels_for(const LabeledCorpus& corpus, const std::vector<std::string>& authors) {
  std::vector<std::size_t> labels;
  for (std::size_t label : corpus.labels) {
    const std::string& name = corpus.authors[label];
    try {
      labels.push_back(author_label(authors, name));
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("author '" + name + "' is not known to the model");
    }
  }
  return labels;
}

struct Prepared {
  std::vector<std::string> authors;
  Vocabulary vocab;
  std::vector<TensorizedDocument> docs;
  std::vector<TaggedDocument> tagged;
  std::vector<std::size_t> labels;
};

Prepared prepare(LabeledCorpus corpus, const Settings& s) {
  Prepared p;
  p.vocab = vocab_from_documents(corpus.docs, s.vocab_limit);
  p.docs = tensorize_all(corpus.docs, corpus.labels, p.vocab, s.model.grid());
  p.authors = std::move(corpus.authors);
  p.tagged = std::move(corpus.docs);
  p.labels = std::move(corpus.labels);
  return p;
}

ModelParams build_model(const ModelConfig& cfg, const Vocabulary& vocab, std::uint64_t seed,
                        const std::string& embeddings) {
  ModelParams m = create_model(cfg, vocab.size());
  if (!embeddings.empty() && cfg.uses_lexical()) {
    const LexicalEmbeddingTable table = load_pretrained(embeddings, vocab, cfg.d_w, seed);
    std::cerr << "embeddings: " << table.found << " of " << vocab.size() << " words found\n";
    initialize_model(m, seed, &table);
  } else {
    initialize_model(m, seed);
  }
  return m;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Per-channel attention statistics over scored documents: mean of the
// largest weight and mean entropy of the weights over real sentences.
struct AttentionTally {
  std::map<std::string, std::pair<double, double>> sums;
  std::size_t docs = 0;

  void add(const ModelParams& model, const std::vector<TensorizedDocument>& scored) {
    for (const auto& doc : scored) {
      const Prediction p = predict(model, doc);
      for (std::size_t c = 0; c < p.alphas.size(); ++c) {
        double top = 0.0, entropy = 0.0;
        for (float a : p.alphas[c]) {
          top = std::max(top, static_cast<double>(a));
          if (a > 0.0f) entropy -= a * std::log(static_cast<double>(a));
        }
        auto& s = sums[to_string(model.layout.channels[c].kind)];
        s.first += top;
        s.second += entropy;
      }
      ++docs;
    }
  }

  json summary() const {
    json out = json::object();
    for (const auto& [name, s] : sums)
      out[name] = {{"mean_max_weight", s.first / static_cast<double>(docs)},
                   {"mean_entropy", s.second / static_cast<double>(docs)}};
    return out;
  }
};

json protocol_json(const ProtocolResult& r) {
  json accs = json::array();
  for (const auto& run : r.runs) accs.push_back(run.accuracy);
  return {{"accuracies", accs}, {"mean", r.mean}, {"std", r.stddev}, {"median", r.median}};
}

std::vector<TensorizedDocument> load_test_docs(const std::string& path, const std::string& tagged,
                                               const std::string& tagger, const Prepared& p, const Settings& s) {
  const LabeledCorpus test = load_corpus(path, tagged, tagger);
  return tensorize_all(test.docs, labels_for(test, p.authors), p.vocab, s.model.grid());
}

// ---------------------------------------------------------------- commands

struct TrainArgs {
  DataFlags data;
  SettingFlags settings;
  std::string out, history, embeddings, test, test_tagged;
};

int cmd_train(const TrainArgs& a) {
  const Settings s = a.settings.resolve();
  Prepared p = prepare(load_corpus(a.data), s);
  ModelConfig mc = s.model;
  mc.num_classes = p.authors.size();
  if (mc.num_classes < 2) throw std::runtime_error("need documents from at least two authors");

  const Split split = split_data(p.labels, s.train.val_fraction, s.train.seed);
  std::vector<TensorizedDocument> train_docs, val_docs;
  for (std::size_t i : split.train) train_docs.push_back(p.docs[i]);
  for (std::size_t i : split.validation) val_docs.push_back(p.docs[i]);

  Checkpoint ckpt;
  ckpt.model = build_model(mc, p.vocab, s.train.seed, a.embeddings);
  ckpt.train = s.train;
  ckpt.vocab = p.vocab;
  ckpt.authors = p.authors;
  const auto start = std::chrono::steady_clock::now();
  const TrainHistory history = train(ckpt.model, train_docs, val_docs, s.train, [&](const EpochRecord& e) {
    if (!a.settings.quiet)
      std::cerr << "epoch " << e.epoch << "/" << s.train.epochs << "  train_loss " << e.train_loss << "  val_loss "
                << e.val_loss << "  val_acc " << e.val_acc << '\n';
  });

  save_checkpoint(ckpt, a.out);
  const std::string history_path =
      a.history.empty() ? fs::path(a.out).replace_extension(".history.csv").string() : a.history;
  std::ostringstream csv;
  history.write_csv(csv);
  write_text(history_path, csv.str());

  json summary = {{"checkpoint", a.out},
                  {"history", history_path},
                  {"mode", to_string(mc.mode)},
                  {"train_documents", train_docs.size()},
                  {"validation_documents", val_docs.size()},
                  {"validation_accuracy", evaluate(ckpt.model, val_docs).accuracy},
                  {"seconds", seconds_since(start)}};
  if (!a.test.empty())
    summary["test_accuracy"] =
        evaluate(ckpt.model, load_test_docs(a.test, a.test_tagged, a.data.tagger, p, s)).accuracy;
  std::cout << summary.dump(2) << '\n';
  return 0;
}

struct EvalArgs {
  DataFlags data;
  std::string model;
};

int cmd_eval(const EvalArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.model);
  const LabeledCorpus corpus = load_corpus(a.data);
  const auto docs = tensorize_all(corpus.docs, labels_for(corpus, ckpt.authors), ckpt.vocab, ckpt.model.config.grid());
  const EvalResult r = evaluate(ckpt.model, docs);
  const json out = {{"accuracy", r.accuracy}, {"loss", r.loss},         {"total", r.total},
                    {"authors", ckpt.authors}, {"confusion", r.confusion}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct PredictArgs {
  std::string model, input, text, tagger;
};

int cmd_predict(const PredictArgs& a) {
  if (a.input.empty() == a.text.empty()) throw UsageError("give exactly one of --input or --text");
  const Checkpoint ckpt = load_checkpoint(a.model);
  const std::string text = a.text.empty() ? read_text(a.input) : a.text;
  const TaggedDocument doc = tag_text(load_tagger(a.tagger), text);
  const Prediction p = predict(ckpt.model, tensorize(doc, ckpt.vocab, ckpt.model.config.grid(), 0));
  json attention = json::object();
  for (std::size_t c = 0; c < p.alphas.size(); ++c)
    attention[to_string(ckpt.model.layout.channels[c].kind)] = p.alphas[c];
  const json out = {{"author", ckpt.authors[p.label]},
                    {"authors", ckpt.authors},
                    {"probabilities", p.probs},
                    {"attention", attention}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct AblateArgs {
  DataFlags data;
  SettingFlags settings;
  std::string out, embeddings, test, test_tagged;
};

int cmd_ablate(const AblateArgs& a) {
  const Settings s = a.settings.resolve();
  const Prepared p = prepare(load_corpus(a.data), s);
  std::vector<TensorizedDocument> test;
  if (!a.test.empty()) test = load_test_docs(a.test, a.test_tagged, a.data.tagger, p, s);

  json modes = json::array(), splits;
  for (const std::string& name : std::vector<std::string>{"syntactic", "lexical", "style", "combined-embed"}) {
    ModelConfig mc = s.model;
    mc.mode = parse_mode(name);
    mc.num_classes = p.authors.size();
    AttentionTally attention;
    const auto start = std::chrono::steady_clock::now();
    const ProtocolResult r = run_protocol(
        p.docs, [&](std::uint64_t seed) { return build_model(mc, p.vocab, seed, a.embeddings); }, s.train,
        a.test.empty() ? nullptr : &test,
        [&](const RunOutcome& run, const ModelParams& model, const std::vector<TensorizedDocument>& scored) {
          if (!a.settings.quiet) std::cerr << name << " run seed " << run.seed << ": accuracy " << run.accuracy << '\n';
          attention.add(model, scored);
        });
    json entry = protocol_json(r);
    entry["mode"] = name;
    entry["attention"] = attention.summary();
    entry["seconds"] = seconds_since(start);
    modes.push_back(entry);
    if (splits.is_null()) {
      splits = json::array();
      for (const auto& run : r.runs) splits.push_back({{"seed", run.seed}, {"validation", run.split.validation}});
    }
  }
  const json report = {{"runs", s.train.runs}, {"seed", s.train.seed}, {"documents", p.docs.size()},
                       {"authors", p.authors}, {"splits", splits},      {"modes", modes}};
  write_text(a.out, report.dump(2) + "\n");
  return 0;
}

struct SweepArgs {
  DataFlags data;
  SettingFlags settings;
  std::string param, out, embeddings;
  std::vector<std::size_t> values;
};

int cmd_sweep(const SweepArgs& a) {
  const Settings base = a.settings.resolve();
  const LabeledCorpus corpus = load_corpus(a.data);
  std::ostringstream csv;
  csv << "value,accuracy\n";
  for (std::size_t value : a.values) {
    if (value < 1) throw UsageError("sweep values must be positive");
    Settings s = base;
    (a.param == "sentences-per-doc" ? s.model.sentences_per_doc : s.model.words_per_sentence) = value;
    const Prepared p = prepare(corpus, s);
    ModelConfig mc = s.model;
    mc.num_classes = p.authors.size();
    const ProtocolResult r = run_protocol(
        p.docs, [&](std::uint64_t seed) { return build_model(mc, p.vocab, seed, a.embeddings); }, s.train);
    if (!a.settings.quiet) std::cerr << a.param << " = " << value << ": median accuracy " << r.median << '\n';
    csv << value << ',' << r.median << '\n';
  }
  write_text(a.out, csv.str());
  return 0;
}

struct GradcheckArgs {
  std::uint64_t seed = 1;
  double corrupt = 0.0;
  bool json_output = false;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  constexpr double kTolerance = 1e-4;
  GradCheckOptions options;
  options.corrupt_gradient = a.corrupt;
  bool all_pass = true;
  json report = json::array();
  std::ostringstream table;
  table << "mode            group                            checked  kinks  max_rel_error\n";
  for (const std::string& name : kModeNames) {
    const GradCheckReport r = check_model_gradients(parse_mode(name), a.seed, options);
    all_pass = all_pass && r.passed(kTolerance);
    json groups = json::array();
    for (const auto& g : r.groups) {
      groups.push_back({{"group", g.name}, {"checked", g.checked}, {"skipped_kinks", g.skipped_kinks},
                        {"max_rel_error", g.max_rel_error}});
      char line[160];
      std::snprintf(line, sizeof line, "%-15s %-32s %7zu %6zu  %.3e%s\n", name.c_str(), g.name.c_str(), g.checked,
                    g.skipped_kinks, g.max_rel_error, g.max_rel_error < kTolerance ? "" : "  FAIL");
      table << line;
    }
    report.push_back({{"mode", name}, {"max_rel_error", r.max_rel_error}, {"passed", r.passed(kTolerance)},
                      {"groups", groups}});
  }
  if (a.json_output)
    std::cout << json({{"tolerance", kTolerance}, {"passed", all_pass}, {"modes", report}}).dump(2) << '\n';
  else
    std::cout << table.str() << (all_pass ? "PASS" : "FAIL") << " (tolerance " << kTolerance << ")\n";
  return all_pass ? 0 : 1;
}

struct SynthArgs {
  SynthOptions options;
  std::string signal = "dual", out, tagger;
  bool retag = false;
};

int cmd_synth(SynthArgs a) {
  a.options.signal = parse_signal(a.signal);
  SynthCorpus corpus;
  try {
    corpus = generate_corpus(make_spec(a.options));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.retag) {
    const PerceptronTagger tagger = load_tagger(a.tagger);
    std::vector<TaggedSentence> truth;
    for (auto& doc : corpus.tagged) {
      truth.insert(truth.end(), doc.begin(), doc.end());
    }
    std::vector<TaggedDocument> retagged;
    for (const auto& raw : corpus.raw) retagged.push_back(tag_text(tagger, raw.text));
    std::cerr << "tagger token accuracy against the generator's tags: " << token_accuracy(tagger, truth) << '\n';
    corpus.tagged = std::move(retagged);
  }
  write_corpus(corpus, a.out);
  std::cerr << "wrote " << corpus.raw.size() << " documents to " << a.out << ".jsonl and " << a.out
            << ".tagged.txt\n";
  return 0;
}

struct TagArgs {
  std::string input, tagger, train_corpus, save;
  int epochs = kDefaultTaggerEpochs;
  std::uint64_t seed = kDefaultTaggerSeed;
};

int cmd_tag(const TagArgs& a) {
  if (a.input.empty() && a.save.empty()) throw UsageError("give --input to tag text and/or --save to store a tagger");
  PerceptronTagger tagger;
  if (!a.train_corpus.empty() || !a.save.empty()) {
    const std::string corpus = a.train_corpus.empty() ? bundled_corpus_path() : a.train_corpus;
    tagger = PerceptronTagger::train(read_tagged_sentences(corpus), a.epochs, a.seed);
  } else {
    tagger = load_tagger(a.tagger);
  }
  if (!a.save.empty()) tagger.save(a.save);
  if (!a.input.empty()) {
    for (const auto& sentence : tag_text(tagger, read_text(a.input)))
      std::cout << format_tagged_sentence(sentence) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Style-aware hierarchical attention networks for authorship attribution", "stylehan"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train one model and write a checkpoint plus history CSV");
  train_args.data.attach(train_cmd);
  train_args.settings.attach(train_cmd);
  train_cmd->add_option("--out", train_args.out, "Checkpoint path")->required();
  train_cmd->add_option("--history", train_args.history, "History CSV (default: <out>.history.csv)");
  train_cmd->add_option("--embeddings", train_args.embeddings, "Pretrained word vectors (word v1 ... vd)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--test", train_args.test, "Separate test dataset, scored after training")
      ->check(CLI::ExistingPath);
  train_cmd->add_option("--test-tagged", train_args.test_tagged, "Pre-tagged test documents")
      ->check(CLI::ExistingFile);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy and confusion counts of a checkpoint on a dataset");
  eval_args.data.attach(eval_cmd);
  eval_cmd->add_option("--model", eval_args.model, "Checkpoint")->required()->check(CLI::ExistingFile);

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Predict the author of one text");
  predict_cmd->add_option("--model", predict_args.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--input", predict_args.input, "Text file ('-' for stdin)");
  predict_cmd->add_option("--text", predict_args.text, "Text given inline");
  predict_cmd->add_option("--tagger", predict_args.tagger, "Saved tagger model")->check(CLI::ExistingFile);

  AblateArgs ablate_args;
  auto* ablate_cmd = app.add_subcommand("ablate", "Run protocol for syntactic, lexical, style and combined-embed");
  ablate_args.data.attach(ablate_cmd);
  ablate_args.settings.attach(ablate_cmd, false);
  ablate_cmd->add_option("--out", ablate_args.out, "JSON report path (default stdout)");
  ablate_cmd->add_option("--embeddings", ablate_args.embeddings, "Pretrained word vectors")->check(CLI::ExistingFile);
  ablate_cmd->add_option("--test", ablate_args.test, "Score on this dataset instead of the validation split")
      ->check(CLI::ExistingPath);
  ablate_cmd->add_option("--test-tagged", ablate_args.test_tagged, "Pre-tagged test documents")
      ->check(CLI::ExistingFile);

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Median run-protocol accuracy per value of one grid size");
  sweep_args.data.attach(sweep_cmd);
  sweep_args.settings.attach(sweep_cmd);
  sweep_cmd->add_option("--param", sweep_args.param, "Swept setting")
      ->required()
      ->check(CLI::IsMember({"sentences-per-doc", "words-per-sentence"}));
  sweep_cmd->add_option("--values", sweep_args.values, "Comma-separated values")->required()->delimiter(',');
  sweep_cmd->add_option("--out", sweep_args.out, "CSV path (default stdout)");
  sweep_cmd->add_option("--embeddings", sweep_args.embeddings, "Pretrained word vectors")->check(CLI::ExistingFile);

  GradcheckArgs grad_args;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every parameter group");
  grad_cmd->add_option("--seed", grad_args.seed, "Fixture seed");
  grad_cmd->add_flag("--json", grad_args.json_output, "JSON report");
  grad_cmd->add_option("--corrupt-gradient", grad_args.corrupt, "Test hook: offset one analytic coordinate per group")
      ->group("");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic multi-author corpus");
  synth_cmd->add_option("--out", synth_args.out, "Output prefix (<prefix>.jsonl, <prefix>.tagged.txt)")->required();
  synth_cmd->add_option("--authors", synth_args.options.authors, "Number of authors");
  synth_cmd->add_option("--docs", synth_args.options.docs_per_author, "Documents per author");
  synth_cmd->add_option("--signal", synth_args.signal, "Style signal")
      ->check(CLI::IsMember({"lexical-only", "syntax-only", "dual"}));
  synth_cmd->add_option("--seed", synth_args.options.seed, "Seed");
  synth_cmd->add_option("--min-sentences", synth_args.options.min_sentences, "Fewest sentences per document");
  synth_cmd->add_option("--max-sentences", synth_args.options.max_sentences, "Most sentences per document");
  synth_cmd->add_option("--min-tokens", synth_args.options.min_tokens, "Shortest sentence");
  synth_cmd->add_option("--max-tokens", synth_args.options.max_tokens, "Longest sentence");
  synth_cmd->add_option("--templates", synth_args.options.base_templates, "Shared base templates");
  synth_cmd->add_option("--words-per-tag", synth_args.options.words_per_tag, "Word pool size per tag");
  synth_cmd->add_option("--syntax-strength", synth_args.options.syntax_strength,
                        "Probability of an author's own template ordering");
  synth_cmd->add_option("--lexical-strength", synth_args.options.lexical_strength,
                        "Extra weight of an author's preferred words");
  synth_cmd->add_flag("--retag", synth_args.retag, "Write tagger output instead of the generator's tags");
  synth_cmd->add_option("--tagger", synth_args.tagger, "Saved tagger model for --retag")->check(CLI::ExistingFile);

  TagArgs tag_args;
  auto* tag_cmd = app.add_subcommand("tag", "POS-tag text, or train and save a tagger");
  tag_cmd->add_option("--input", tag_args.input, "Text file ('-' for stdin)");
  tag_cmd->add_option("--tagger", tag_args.tagger, "Saved tagger model")->check(CLI::ExistingFile);
  tag_cmd->add_option("--train-corpus", tag_args.train_corpus, "Tagged corpus to train on (default: bundled)")
      ->check(CLI::ExistingFile);
  tag_cmd->add_option("--epochs", tag_args.epochs, "Training epochs");
  tag_cmd->add_option("--seed", tag_args.seed, "Training seed");
  tag_cmd->add_option("--save", tag_args.save, "Write the trained tagger here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) return cmd_train(train_args);
    if (*eval_cmd) return cmd_eval(eval_args);
    if (*predict_cmd) return cmd_predict(predict_args);
    if (*ablate_cmd) return cmd_ablate(ablate_args);
    if (*sweep_cmd) return cmd_sweep(sweep_args);
    if (*grad_cmd) return cmd_gradcheck(grad_args);
    if (*synth_cmd) return cmd_synth(synth_args);
    if (*tag_cmd) return cmd_tag(tag_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
