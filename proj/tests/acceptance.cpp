// Acceptance run: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number (`acceptance 1 4`); exit status is non-zero if any fail.
//
// Thresholds and corpus settings below were frozen after calibration runs on
// the synthetic generator; see README for the numbers observed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "stylehan/checkpoint.hpp"
#include "stylehan/corpus_io.hpp"
#include "stylehan/model_check.hpp"
#include "stylehan/tagger.hpp"
#include "stylehan/trainer.hpp"

using namespace stylehan;
using namespace stylehan::testing;

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr double kLnTolerance = 1e-6;
constexpr int kPadTrials = 100;
constexpr int kOverfitSeeds = 10, kOverfitNeeded = 9;
constexpr std::size_t kOverfitEpochs = 200;
constexpr double kOverfitSeconds = 120.0;
constexpr double kStyleDualFloor = 0.90;
constexpr double kSyntaxOnlyFloor = 0.80;
constexpr double kOrderingSlack = 0.01;
constexpr double kTaggerFloor = 0.90;
constexpr int kSweepInversions = 1;

// Separation corpora: 4 authors x 50 documents.
constexpr double kSeparationSyntax = 0.5, kSeparationLexical = 3.0;
constexpr std::size_t kSeparationDim = 16, kSeparationEpochs = 40, kProtocolRuns = 3;

// Sweep corpus: weaker signal and 30-40 sentence documents so that longer
// grids actually see more text and accuracy stays off the ceiling.
constexpr double kSweepSyntax = 0.3, kSweepLexical = 1.0;
constexpr std::size_t kSweepDim = 8, kSweepEpochs = 30;
constexpr std::size_t kSweepMinSentences = 30, kSweepMaxSentences = 40;
const std::vector<std::size_t> kSweepValues = {5, 10, 20, 40};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// ---- 1 -------------------------------------------------------------------

Outcome gradient_check() {
  std::string detail;
  bool pass = true;
  for (Mode mode : {Mode::style, Mode::lexical, Mode::syntactic, Mode::combined}) {
    const auto t0 = std::chrono::steady_clock::now();
    const GradCheckReport r = check_model_gradients(mode, 11);
    const double secs = seconds_since(t0);
    // Every group must have been looked at.
    bool groups_ok = r.groups.size() == create_model(gradcheck_config(mode), kTinyVocab).params.size();
    for (const auto& g : r.groups) groups_ok = groups_ok && g.checked > 0;
    pass = pass && r.passed(kGradTolerance) && groups_ok && secs < kGradSeconds;
    detail += fmt("%s max rel %.2e over %zu coords (%zu kink skips) %.1fs; ", to_string(mode).c_str(),
                  r.max_rel_error, r.checked, r.skipped_kinks, secs);
  }
  return {pass, detail};
}

// ---- 2 -------------------------------------------------------------------

Outcome analytic_identities() {
  std::vector<std::string> failed;

  {
    Graph<float> g;
    const auto p = g.to_vector(ops::softmax(g, g.constant({2}, {0, 0})));
    if (p != std::vector<float>{0.5f, 0.5f}) failed.push_back("softmax([0,0])");
  }

  const ParamSet none;
  for (std::size_t c = 2; c <= 10; ++c) {
    const std::vector<std::vector<float>> probs(3, std::vector<float>(c, 1.0f / static_cast<float>(c)));
    const double loss = compute_loss(probs, {0, 1, c - 1}, none, 0.0);
    if (std::fabs(loss - std::log(static_cast<double>(c))) > kLnTolerance) failed.push_back(fmt("ln %zu", c));
  }
  // Same through the full model: a zero classifier predicts uniformly.
  {
    std::mt19937_64 rng(5);
    ModelConfig cfg = gradcheck_config(Mode::style);
    cfg.num_classes = 3;
    ModelParams m = seeded_model(cfg, kTinyVocab, 5);
    for (std::size_t idx : {m.layout.classifier_weight, m.layout.classifier_bias})
      for (float& x : m.params.values[idx].storage()) x = 0.0f;
    std::vector<TensorizedDocument> docs;
    for (std::size_t i = 0; i < 6; ++i) docs.push_back(random_document(cfg, kTinyVocab, 1 + i % 3, i % 3, rng));
    if (std::fabs(evaluate(m, docs).loss - std::log(3.0)) > kLnTolerance) failed.push_back("model ln 3");
  }

  ModelParams m = seeded_model(gradcheck_config(Mode::lexical), kTinyVocab, 2);
  const ChannelLayout& ch = m.layout.channels[0];
  {
    ModelParams zero = m;
    for (const LstmLayout* cell : {&ch.forward, &ch.backward})
      for (std::size_t idx : {cell->w_input, cell->w_hidden, cell->bias})
        for (float& x : zero.params.values[idx].storage()) x = 0.0f;
    Graph<float> g(&zero.params);
    const std::size_t k = zero.config.sentence_dim();
    const auto hs = encode_sentences_bilstm(
        g, {g.constant({k}, std::vector<float>(k, 0.7f)), g.constant({k}, std::vector<float>(k, -3.0f)), g.zeros({k})},
        {1, 1, 0}, ch, zero.config.lstm_hidden);
    bool zeros = true;
    for (Var h : hs)
      for (float v : g.to_vector(h)) zeros = zeros && v == 0.0f;
    if (!zeros) failed.push_back("zero-weight BiLSTM");
  }
  {
    Graph<float> g(&m.params);
    const std::size_t width = 2 * m.config.lstm_hidden;
    std::vector<float> h(width);
    for (std::size_t i = 0; i < width; ++i) h[i] = std::sin(1.0f + static_cast<float>(i));
    const auto one = attend(g, {g.zeros({width}), g.constant({width}, h), g.zeros({width})}, {0, 1, 0}, ch);
    if (g.to_vector(one.document) != h || one.alphas != std::vector<float>{0, 1, 0})
      failed.push_back("single-sentence attention");
  }

  std::string detail = "softmax, ln C for C=2..10 and through a zero classifier, zero BiLSTM, one-sentence attention";
  if (!failed.empty()) {
    detail = "failed:";
    for (const auto& f : failed) detail += " " + f;
  }
  return {failed.empty(), detail};
}

// ---- 3 -------------------------------------------------------------------

Outcome pad_invariance() {
  std::mt19937_64 rng(20261016);
  int bad = 0;
  for (int trial = 0; trial < kPadTrials; ++trial) {
    const Mode mode = static_cast<Mode>(trial % 4);
    ModelConfig cfg = small_config(mode, 2 + trial % 3, 4);
    cfg.sentences_per_doc = 2 + trial % 5;
    cfg.words_per_sentence = 4 + trial % 4;
    const std::size_t vocab = 30;
    ModelParams m = seeded_model(cfg, vocab, 5000 + static_cast<std::uint64_t>(trial));
    const std::size_t real = 1 + rng() % cfg.sentences_per_doc;
    const TensorizedDocument doc = random_document(cfg, vocab, real, 0, rng);
    const Prediction base = predict(m, doc);
    ModelParams wide = m;
    wide.config.sentences_per_doc += 1 + rng() % 6;
    const Prediction padded = predict(wide, with_sentence_rows(doc, wide.config.sentences_per_doc));
    if (padded.probs != base.probs) ++bad;
  }
  return {bad == 0, fmt("%d/%d documents changed under padding (bitwise comparison)", bad, kPadTrials)};
}

// ---- 4 -------------------------------------------------------------------

Outcome overfit() {
  const auto t0 = std::chrono::steady_clock::now();
  int fitted = 0;
  std::string accs;
  for (int seed = 1; seed <= kOverfitSeeds; ++seed) {
    SynthOptions o;
    o.authors = 2;
    o.docs_per_author = 4;
    o.seed = static_cast<std::uint64_t>(seed);
    const SynthData data = synth_data(o, small_config(Mode::style, 2).grid());
    ModelParams m = seeded_model(small_config(Mode::style, 2), data.vocab_size, static_cast<std::uint64_t>(seed));
    TrainConfig cfg;
    cfg.epochs = kOverfitEpochs;
    cfg.seed = static_cast<std::uint64_t>(seed);
    train(m, data.docs, {}, cfg);
    const double acc = evaluate(m, data.docs).accuracy;
    fitted += acc == 1.0;
    accs += fmt(" %.3g", acc);
  }
  const double secs = seconds_since(t0);
  return {fitted >= kOverfitNeeded && secs < kOverfitSeconds,
          fmt("%d/%d seeds reach training accuracy 1.0 (%s ) in %.1fs", fitted, kOverfitSeeds, accs.c_str(), secs)};
}

// ---- 5, 6, 7 -------------------------------------------------------------

struct ProtocolData {
  std::vector<TensorizedDocument> docs;
  std::size_t vocab_size = 0;
};

ProtocolData protocol_corpus(Signal signal, double syntax, double lexical, std::size_t min_sentences,
                             std::size_t max_sentences, GridShape grid) {
  SynthOptions o;
  o.signal = signal;
  o.syntax_strength = syntax;
  o.lexical_strength = lexical;
  o.min_sentences = min_sentences;
  o.max_sentences = max_sentences;
  const SynthData data = synth_data(o, grid);
  return {data.docs, data.vocab_size};
}

ModelConfig protocol_config(Mode mode, std::size_t dim, std::size_t sentences) {
  ModelConfig cfg = small_config(mode, 4, dim);
  cfg.sentences_per_doc = sentences;
  return cfg;
}

ProtocolResult run_mode(const ProtocolData& data, const ModelConfig& cfg, std::size_t epochs) {
  TrainConfig tc;
  tc.epochs = epochs;
  tc.runs = kProtocolRuns;
  tc.seed = 1;
  return run_protocol(
      data.docs, [&](std::uint64_t seed) { return seeded_model(cfg, data.vocab_size, seed); }, tc);
}

std::string runs_text(const ProtocolResult& r) {
  std::string s = fmt("median %.3f [", r.median);
  for (const auto& run : r.runs) s += fmt(" %.3f", run.accuracy);
  return s + " ]";
}

// Dual-corpus results per mode, computed once and shared by 5, 6 and 7.
struct DualResults {
  ProtocolResult style, lexical, syntactic, combined;
};

const DualResults& dual_results() {
  static const DualResults results = [] {
    const ModelConfig base = protocol_config(Mode::style, kSeparationDim, 16);
    const ProtocolData data =
        protocol_corpus(Signal::dual, kSeparationSyntax, kSeparationLexical, 8, 16, base.grid());
    auto with = [&](Mode mode) {
      return run_mode(data, protocol_config(mode, kSeparationDim, 16), kSeparationEpochs);
    };
    return DualResults{with(Mode::style), with(Mode::lexical), with(Mode::syntactic), with(Mode::combined)};
  }();
  return results;
}

Outcome separation() {
  const ProtocolResult& style = dual_results().style;
  const ModelConfig cfg = protocol_config(Mode::syntactic, kSeparationDim, 16);
  const ProtocolData syntax_only = protocol_corpus(Signal::syntax_only, kSeparationSyntax, 0.0, 8, 16, cfg.grid());
  const ProtocolResult syntactic = run_mode(syntax_only, cfg, kSeparationEpochs);
  return {style.median >= kStyleDualFloor && syntactic.median >= kSyntaxOnlyFloor,
          "dual Style-HAN " + runs_text(style) + fmt(" (>= %.2f); ", kStyleDualFloor) +
              "syntax-only Syntactic-HAN " + runs_text(syntactic) + fmt(" (>= %.2f)", kSyntaxOnlyFloor)};
}

Outcome channel_ordering() {
  const DualResults& r = dual_results();
  return {r.style.median >= r.lexical.median - kOrderingSlack && r.style.median >= r.syntactic.median - kOrderingSlack,
          "style " + runs_text(r.style) + ", lexical " + runs_text(r.lexical) + ", syntactic " +
              runs_text(r.syntactic)};
}

Outcome fusion_ordering() {
  const DualResults& r = dual_results();
  return {r.style.median >= r.combined.median - kOrderingSlack,
          "parallel " + runs_text(r.style) + ", combined-embed " + runs_text(r.combined)};
}

// ---- 8 -------------------------------------------------------------------

Outcome persistence() {
  SynthOptions o;
  o.authors = 3;
  o.docs_per_author = 6;
  o.seed = 4;
  const SynthCorpus corpus = generate_corpus(make_spec(o));
  const LabeledCorpus labeled = label_corpus(corpus.raw, corpus.tagged);
  const Vocabulary vocab = vocab_from_documents(labeled.docs, 50000);

  auto trained = [&](std::uint64_t seed) {
    Checkpoint c;
    c.vocab = vocab;
    c.authors = labeled.authors;
    c.train.epochs = 3;
    c.train.seed = seed;
    c.model = seeded_model(small_config(Mode::style, 3), vocab.size(), seed);
    const auto docs = tensorize_all(labeled.docs, labeled.labels, vocab, c.model.config.grid());
    train(c.model, docs, {}, c.train);
    return c;
  };
  const Checkpoint a = trained(9), b = trained(9);
  const std::string bytes = serialize_checkpoint(a);
  const bool same_seed = bytes == serialize_checkpoint(b);

  const auto path = (std::filesystem::temp_directory_path() / "stylehan_acceptance.shn").string();
  save_checkpoint(a, path);
  const Checkpoint loaded = load_checkpoint(path);
  std::filesystem::remove(path);
  const bool round_trip = serialize_checkpoint(loaded) == bytes;

  const auto docs = tensorize_all(labeled.docs, labeled.labels, vocab, a.model.config.grid());
  std::size_t mismatched = 0;
  for (const auto& doc : docs) {
    const Prediction p = predict(a.model, doc), q = predict(loaded.model, doc);
    mismatched += p.probs != q.probs || p.alphas != q.alphas;
  }
  return {same_seed && round_trip && mismatched == 0,
          fmt("same-seed checkpoints identical: %s; save/load bytes identical: %s; %zu/%zu predictions differ",
              same_seed ? "yes" : "no", round_trip ? "yes" : "no", mismatched, docs.size())};
}

// ---- 9 -------------------------------------------------------------------

Outcome tagger() {
  const auto corpus = read_tagged_sentences(bundled_corpus_path());
  const std::size_t cut = corpus.size() * 4 / 5;
  const std::vector<TaggedSentence> train_part(corpus.begin(), corpus.begin() + cut),
      held(corpus.begin() + cut, corpus.end());
  const PerceptronTagger t = PerceptronTagger::train(train_part, kDefaultTaggerEpochs, kDefaultTaggerSeed);
  const double acc = token_accuracy(t, held);

  // Punctuation over the held-out part plus every inventory symbol in odd contexts.
  const TagSet& tags = TagSet::standard();
  std::size_t punct = 0, punct_ok = 0;
  auto count = [&](const std::vector<std::string>& tokens) {
    const TaggedSentence out = t.tag(tokens);
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (const auto forced = tags.punctuation_tag(tokens[i])) {
        ++punct;
        punct_ok += out.tags[i] == *forced;
      }
  };
  for (const auto& s : held) count(s.tokens);
  for (const char* p : {".", ",", ":", ";", "(", ")", "``", "''", "#", "$", "?", "!"}) {
    count({p});
    count({"the", p, "ran", p});
    count({p, p, "Smith"});
  }
  return {acc >= kTaggerFloor && punct > 0 && punct_ok == punct,
          fmt("held-out token accuracy %.4f on %zu sentences (>= %.2f); punctuation %zu/%zu", acc, held.size(),
              kTaggerFloor, punct_ok, punct)};
}

// ---- 10 ------------------------------------------------------------------

Outcome length_sweep() {
  SynthOptions o;
  o.syntax_strength = kSweepSyntax;
  o.lexical_strength = kSweepLexical;
  o.min_sentences = kSweepMinSentences;
  o.max_sentences = kSweepMaxSentences;
  const SynthCorpus corpus = generate_corpus(make_spec(o));
  const LabeledCorpus labeled = label_corpus(corpus.raw, corpus.tagged);
  const Vocabulary vocab = vocab_from_documents(labeled.docs, 50000);

  std::vector<double> medians;
  std::string detail = "M ->";
  for (std::size_t m : kSweepValues) {
    const ModelConfig cfg = protocol_config(Mode::style, kSweepDim, m);
    const ProtocolData data{tensorize_all(labeled.docs, labeled.labels, vocab, cfg.grid()), vocab.size()};
    const ProtocolResult r = run_mode(data, cfg, kSweepEpochs);
    medians.push_back(r.median);
    detail += fmt(" %zu: %.3f", m, r.median);
  }
  int inversions = 0;
  for (std::size_t i = 1; i < medians.size(); ++i) inversions += medians[i] < medians[i - 1];
  return {inversions <= kSweepInversions, detail + fmt("; %d inversion(s) (<= %d)", inversions, kSweepInversions)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "full-model gradient check", gradient_check},
      {2, "analytic identities", analytic_identities},
      {3, "pad invariance", pad_invariance},
      {4, "overfit sanity", overfit},
      {5, "synthetic separation", separation},
      {6, "fused channels vs single channels", channel_ordering},
      {7, "parallel fusion vs combined embedding", fusion_ordering},
      {8, "determinism and persistence", persistence},
      {9, "tagger accuracy and punctuation", tagger},
      {10, "document-length sweep trend", length_sweep},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    failures += !out.pass;
    std::printf("%s [%2d] %s: %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
