#pragma once

#include <random>
#include <vector>

#include "stylehan/model.hpp"
#include "stylehan/model_check.hpp"
#include "stylehan/pipeline.hpp"
#include "stylehan/synth.hpp"
#include "stylehan/textpipe.hpp"

namespace stylehan::testing {

inline ModelConfig tiny_config(Mode mode = Mode::style) { return gradcheck_config(mode); }

inline constexpr std::size_t kTinyVocab = 20;

// Random document with `real` non-empty sentences of random length in
// [min_len, words_per_sentence].
inline TensorizedDocument random_document(const ModelConfig& cfg, std::size_t vocab, std::size_t real,
                                          std::size_t label, std::mt19937_64& rng, std::size_t min_len = 1) {
  TensorizedDocument doc;
  doc.grid = cfg.grid();
  doc.label = label;
  doc.word_ids.assign(cfg.sentences_per_doc * cfg.words_per_sentence, kPadId);
  doc.tag_ids.assign(doc.word_ids.size(), kPadId);
  doc.sentence_mask.assign(cfg.sentences_per_doc, 0);
  std::uniform_int_distribution<std::size_t> word(1, vocab - 1);
  std::uniform_int_distribution<std::size_t> tag(1, TagSet::kTagCount);
  std::uniform_int_distribution<std::size_t> len(min_len, cfg.words_per_sentence);
  for (std::size_t s = 0; s < real && s < cfg.sentences_per_doc; ++s) {
    doc.sentence_mask[s] = 1;
    const std::size_t n = len(rng);
    for (std::size_t w = 0; w < n; ++w) {
      doc.word_ids[s * cfg.words_per_sentence + w] = word(rng);
      doc.tag_ids[s * cfg.words_per_sentence + w] = tag(rng);
    }
  }
  return doc;
}

// Same document re-gridded with more sentence rows (extra rows are padding).
inline TensorizedDocument with_sentence_rows(const TensorizedDocument& doc, std::size_t rows) {
  TensorizedDocument out = doc;
  out.grid.sentences_per_doc = rows;
  out.word_ids.resize(rows * doc.grid.words_per_sentence, kPadId);
  out.tag_ids.resize(rows * doc.grid.words_per_sentence, kPadId);
  out.sentence_mask.resize(rows, 0);
  return out;
}

// Small model over the synthetic-corpus grid (16 sentences of up to 12 words).
inline ModelConfig small_config(Mode mode, std::size_t classes, std::size_t dim = 8) {
  ModelConfig cfg;
  cfg.sentences_per_doc = 16;
  cfg.words_per_sentence = 12;
  cfg.d_w = cfg.d_p = dim;
  cfg.receptive_fields = {2, 3};
  cfg.filters_per_size = dim;
  cfg.lstm_hidden = dim;
  cfg.attention_dim = 2 * dim;
  cfg.num_classes = classes;
  cfg.mode = mode;
  return cfg;
}

struct SynthData {
  std::vector<TensorizedDocument> docs;
  std::size_t vocab_size = 0;
};

// Generates a corpus with ground-truth tags and tensorizes it on `grid`.
inline SynthData synth_data(const SynthOptions& options, GridShape grid) {
  const SynthCorpus corpus = generate_corpus(make_spec(options));
  const LabeledCorpus labeled = label_corpus(corpus.raw, corpus.tagged);
  const Vocabulary vocab = vocab_from_documents(labeled.docs, 50000);
  return {tensorize_all(labeled.docs, labeled.labels, vocab, grid), vocab.size()};
}

inline ModelParams seeded_model(const ModelConfig& cfg, std::size_t vocab, std::uint64_t seed) {
  ModelParams m = create_model(cfg, vocab);
  initialize_model(m, seed);
  return m;
}

}  // namespace stylehan::testing
