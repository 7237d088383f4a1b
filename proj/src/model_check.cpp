#include "stylehan/model_check.hpp"

#include <random>

namespace stylehan {

ModelConfig gradcheck_config(Mode mode) {
  ModelConfig cfg;
  cfg.sentences_per_doc = 3;
  cfg.words_per_sentence = 6;
  cfg.d_w = 4;
  cfg.d_p = 4;
  cfg.receptive_fields = {2, 3};
  cfg.filters_per_size = 2;
  cfg.lstm_hidden = 3;
  cfg.attention_dim = 6;
  cfg.num_classes = 2;
  cfg.mode = mode;
  return cfg;
}

CheckFixture make_check_fixture(Mode mode, std::uint64_t seed) {
  constexpr std::size_t kVocab = 20;
  const ModelConfig cfg = gradcheck_config(mode);
  ModelParams model = create_model(cfg, kVocab);
  initialize_model(model, seed);

  CheckFixture out{model.cast<double>(), {}};
  std::mt19937_64 rng(seed ^ 0xc0ffeeull);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  for (std::size_t p = 0; p < out.model.params.size(); ++p) {
    const ParamSpec& spec = out.model.params.specs[p];
    auto& values = out.model.params.values[p].storage();
    const std::size_t first = spec.table ? spec.shape.back() : 0;
    for (std::size_t i = first; i < values.size(); ++i) values[i] += jitter(rng);
  }

  // Sentences of at least 3 words keep every receptive field inside real text
  // for at least one window; the last document leaves one sentence padded.
  std::uniform_int_distribution<std::size_t> word(1, kVocab - 1), tag(1, TagSet::kTagCount);
  const std::size_t real_counts[] = {3, 2, 3};
  for (std::size_t d = 0; d < 3; ++d) {
    TensorizedDocument doc;
    doc.grid = cfg.grid();
    doc.label = d % cfg.num_classes;
    doc.word_ids.assign(cfg.sentences_per_doc * cfg.words_per_sentence, kPadId);
    doc.tag_ids.assign(doc.word_ids.size(), kPadId);
    doc.sentence_mask.assign(cfg.sentences_per_doc, 0);
    for (std::size_t s = 0; s < real_counts[d]; ++s) {
      doc.sentence_mask[s] = 1;
      const std::size_t len = 3 + (rng() % (cfg.words_per_sentence - 2));
      for (std::size_t w = 0; w < len; ++w) {
        doc.word_ids[s * cfg.words_per_sentence + w] = word(rng);
        doc.tag_ids[s * cfg.words_per_sentence + w] = tag(rng);
      }
    }
    out.docs.push_back(std::move(doc));
  }
  return out;
}

GradCheckReport check_model_gradients(Mode mode, std::uint64_t seed, const GradCheckOptions& options) {
  const CheckFixture fx = make_check_fixture(mode, seed);
  const ModelConfig& cfg = fx.model.config;
  const ModelLayout& layout = fx.model.layout;
  Objective f = [&](const BasicParams<double>& params, Gradients<double>* sink) {
    return document_objective(cfg, layout, params, fx.docs, sink);
  };
  return finite_diff_check(f, fx.model.params, options);
}

}  // namespace stylehan
