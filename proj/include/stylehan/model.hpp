#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stylehan/embeddings.hpp"
#include "stylehan/gradcheck.hpp"
#include "stylehan/graph.hpp"
#include "stylehan/params.hpp"
#include "stylehan/textpipe.hpp"

namespace stylehan {

// style: parallel lexical and syntactic channels fused by concatenation.
// lexical / syntactic: one channel. combined: one channel over per-word
// concatenated lexical and syntactic embeddings.
enum class Mode { style, lexical, syntactic, combined };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);  // accepts "combined-embed" and "combined"

struct ModelConfig {
  std::size_t sentences_per_doc = 40;
  std::size_t words_per_sentence = 30;
  std::size_t d_w = 100;
  std::size_t d_p = 100;
  std::vector<std::size_t> receptive_fields = {3, 4, 5};
  std::size_t filters_per_size = 100;
  std::size_t lstm_hidden = 100;
  std::size_t attention_dim = 200;
  std::size_t num_classes = 2;
  Mode mode = Mode::style;
  bool freeze_lexical = false;

  void validate() const;  // throws std::invalid_argument
  GridShape grid() const { return {sentences_per_doc, words_per_sentence}; }
  std::size_t sentence_dim() const { return receptive_fields.size() * filters_per_size; }
  std::size_t fusion_dim() const { return (mode == Mode::style ? 4 : 2) * lstm_hidden; }
  bool uses_lexical() const { return mode != Mode::syntactic; }
  bool uses_syntactic() const { return mode != Mode::lexical; }

  // Dataset presets: "ccat" (30 words/sentence) and "blogs" (20), both 40
  // sentences/document.
  static ModelConfig preset(const std::string& name);

  bool operator==(const ModelConfig&) const = default;
};

enum class Channel { lexical, syntactic, combined };
std::string to_string(Channel channel);

struct LstmLayout {
  std::size_t w_input, w_hidden, bias;
};

struct ChannelLayout {
  Channel kind;
  std::size_t input_dim;
  std::vector<std::size_t> conv_weight;  // per receptive field, F × r·d
  std::vector<std::size_t> conv_bias;    // per receptive field, F
  LstmLayout forward, backward;
  std::size_t attn_weight, attn_bias, attn_context;
};

struct ModelLayout {
  std::optional<std::size_t> lexical_table, syntactic_table;
  std::vector<ChannelLayout> channels;
  std::size_t classifier_weight = 0, classifier_bias = 0;
};

/// Model configuration, parameter layout and values.
///
/// Parameter enumeration order (the checkpoint manifest order):
///   embed.lexical            |vocab| × d_w   (modes using lexical input)
///   embed.syntactic          48 × d_p        (modes using syntactic input)
///   then per channel, lexical before syntactic (combined: one channel):
///     <ch>.conv.r<r>.weight  F × r·d         for each r in receptive_fields
///     <ch>.conv.r<r>.bias    F
///     <ch>.lstm.fwd.w_input  4H × K, <ch>.lstm.fwd.w_hidden 4H × H, <ch>.lstm.fwd.bias 4H
///     <ch>.lstm.bwd.*        as above
///     <ch>.attn.weight       A × 2H, <ch>.attn.bias A, <ch>.attn.context A
///   classifier.weight        C × fusion_dim
///   classifier.bias          C
/// LSTM gate blocks are ordered input, forget, output, candidate.
template <class T>
struct BasicModel {
  ModelConfig config;
  ModelLayout layout;
  BasicParams<T> params;

  template <class U>
  BasicModel<U> cast() const {
    return {config, layout, params.template cast<U>()};
  }
};

using ModelParams = BasicModel<float>;

// Builds the layout with zero-valued parameters.
ModelParams create_model(const ModelConfig& config, std::size_t vocab_size);

// Seeded initialization. Conv, dense and input-to-hidden weights are uniform
// ±sqrt(6/(fan_in+fan_out)); hidden-to-hidden weights uniform ±0.05; biases
// zero except the forget-gate slice (1.0); the attention context vector is
// uniform ±sqrt(6/(A+1)). Embedding tables come from `lexical` when given,
// else the fallback draw, and init_syntactic.
void initialize_model(ModelParams& model, std::uint64_t seed, const LexicalEmbeddingTable* lexical = nullptr);

template <class T>
struct DocumentForward {
  Var probs;
  Var fused;
  std::vector<Var> channel_vectors;
  std::vector<std::vector<T>> alphas;  // per channel, length sentences_per_doc
};

namespace model_ops {

template <class T>
Var sentence_input(Graph<T>& g, const ModelLayout& layout, const ChannelLayout& ch, const TensorizedDocument& doc,
                   std::size_t s) {
  switch (ch.kind) {
    case Channel::lexical:
      return ops::embedding_rows(g, *layout.lexical_table, doc.sentence_words(s));
    case Channel::syntactic:
      return ops::embedding_rows(g, *layout.syntactic_table, doc.sentence_tags(s));
    default:
      return ops::concat_cols(g, ops::embedding_rows(g, *layout.lexical_table, doc.sentence_words(s)),
                              ops::embedding_rows(g, *layout.syntactic_table, doc.sentence_tags(s)));
  }
}

}  // namespace model_ops

/// Word-level encoder: for each receptive field, relu(conv) then max over
/// time, concatenated in (field, filter) order. Output length K.
template <class T>
Var encode_words_cnn(Graph<T>& g, Var sentence_embeds, const ChannelLayout& ch) {
  std::vector<Var> pooled;
  pooled.reserve(ch.conv_weight.size());
  for (std::size_t k = 0; k < ch.conv_weight.size(); ++k) {
    Var maps = ops::conv_bank(g, sentence_embeds, g.param(ch.conv_weight[k]), g.param(ch.conv_bias[k]));
    pooled.push_back(ops::max_over_time_rows(g, ops::relu(g, maps)));
  }
  return pooled.size() == 1 ? pooled[0] : ops::concat(g, pooled);
}

template <class T>
Var lstm_step_gates(Graph<T>& g, const LstmLayout& cell, Var x, Var h) {
  return ops::add(g, ops::add(g, ops::matvec(g, g.param(cell.w_input), x), ops::matvec(g, g.param(cell.w_hidden), h)),
                  g.param(cell.bias));
}

/// Sentence-level encoder. Runs forward over the real (masked-in) sentences
/// in order and backward over them reversed, from zero states; each real
/// position gets [h_fwd; h_bwd]. Pad positions get zeros(2H).
template <class T>
std::vector<Var> encode_sentences_bilstm(Graph<T>& g, const std::vector<Var>& sentence_vecs,
                                         const std::vector<std::uint8_t>& mask, const ChannelLayout& ch,
                                         std::size_t hidden) {
  if (sentence_vecs.size() != mask.size())
    throw DimensionError("bilstm: " + std::to_string(sentence_vecs.size()) + " sentence vectors for a mask of " +
                         std::to_string(mask.size()));
  std::size_t real = 0;
  while (real < mask.size() && mask[real]) ++real;
  auto run = [&](const LstmLayout& cell, bool reverse) {
    std::vector<Var> hs(real);
    Var h = g.zeros({hidden});
    Var c = g.zeros({hidden});
    for (std::size_t step = 0; step < real; ++step) {
      const std::size_t t = reverse ? real - 1 - step : step;
      Var state = ops::lstm_cell(g, lstm_step_gates(g, cell, sentence_vecs[t], h), c);
      h = ops::slice(g, state, 0, hidden);
      c = ops::slice(g, state, hidden, hidden);
      hs[t] = h;
    }
    return hs;
  };
  const auto fwd = run(ch.forward, false);
  const auto bwd = run(ch.backward, true);
  std::vector<Var> out;
  out.reserve(mask.size());
  for (std::size_t t = 0; t < mask.size(); ++t)
    out.push_back(t < real ? ops::concat(g, {fwd[t], bwd[t]}) : g.zeros({2 * hidden}));
  return out;
}

template <class T>
struct Attended {
  Var document;
  std::vector<T> alphas;  // full length, zero at masked positions
};

/// Sentence attention: u_i = tanh(W_s h_i + b_s), score_i = u_iᵀ u_s,
/// α = softmax over unmasked scores, V = Σ α_i h_i.
template <class T>
Attended<T> attend(Graph<T>& g, const std::vector<Var>& contextual, const std::vector<std::uint8_t>& mask,
                   const ChannelLayout& ch) {
  std::vector<Var> rows, scores;
  for (std::size_t i = 0; i < contextual.size(); ++i) {
    if (!mask.at(i)) continue;
    Var u = ops::tanh(g, ops::add(g, ops::matvec(g, g.param(ch.attn_weight), contextual[i]), g.param(ch.attn_bias)));
    scores.push_back(ops::dot(g, u, g.param(ch.attn_context)));
    rows.push_back(contextual[i]);
  }
  if (rows.empty()) throw std::invalid_argument("attend: every sentence is masked");
  Var alpha = ops::softmax(g, ops::concat(g, scores));
  Attended<T> out{ops::weighted_sum_rows(g, alpha, ops::stack_rows(g, rows)), std::vector<T>(mask.size(), T{0})};
  std::size_t k = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.alphas[i] = g.data(alpha)[k++];
  return out;
}

/// Style mode concatenates [lexical; syntactic]; single-channel modes pass through.
template <class T>
Var fuse(Graph<T>& g, const std::vector<Var>& channel_vectors, Mode mode) {
  if (mode == Mode::style) {
    if (channel_vectors.size() != 2) throw DimensionError("fuse: style mode needs two channel vectors");
    return ops::concat(g, channel_vectors);
  }
  if (channel_vectors.size() != 1) throw DimensionError("fuse: single-channel mode needs one channel vector");
  return channel_vectors[0];
}

/// softmax(W_c v + b_c)
template <class T>
Var classify(Graph<T>& g, Var v, const ModelLayout& layout) {
  Var w = g.param(layout.classifier_weight);
  if (g.shape(w)[1] != g.size(v))
    throw DimensionError("classify: document vector of " + std::to_string(g.size(v)) +
                         " does not match classifier width " + std::to_string(g.shape(w)[1]));
  return ops::softmax(g, ops::add(g, ops::matvec(g, w, v), g.param(layout.classifier_bias)));
}

template <class T>
Attended<T> encode_channel(Graph<T>& g, const ModelConfig& cfg, const ModelLayout& layout, const ChannelLayout& ch,
                           const TensorizedDocument& doc) {
  std::vector<Var> sentence_vecs;
  sentence_vecs.reserve(cfg.sentences_per_doc);
  for (std::size_t s = 0; s < cfg.sentences_per_doc; ++s) {
    if (doc.sentence_mask[s])
      sentence_vecs.push_back(encode_words_cnn(g, model_ops::sentence_input(g, layout, ch, doc, s), ch));
    else
      sentence_vecs.push_back(g.zeros({cfg.sentence_dim()}));
  }
  auto contextual = encode_sentences_bilstm(g, sentence_vecs, doc.sentence_mask, ch, cfg.lstm_hidden);
  return attend(g, contextual, doc.sentence_mask, ch);
}

inline void check_document(const ModelConfig& cfg, const TensorizedDocument& doc) {
  if (doc.grid.sentences_per_doc != cfg.sentences_per_doc || doc.grid.words_per_sentence != cfg.words_per_sentence)
    throw DimensionError("document grid " + std::to_string(doc.grid.sentences_per_doc) + "x" +
                         std::to_string(doc.grid.words_per_sentence) + " does not match model grid " +
                         std::to_string(cfg.sentences_per_doc) + "x" + std::to_string(cfg.words_per_sentence));
}

/// Full Style-HAN forward pass for one document. `g` must be bound to
/// parameters laid out by `layout`.
template <class T>
DocumentForward<T> forward_document(Graph<T>& g, const ModelConfig& cfg, const ModelLayout& layout,
                                    const TensorizedDocument& doc) {
  check_document(cfg, doc);
  DocumentForward<T> out;
  for (const auto& ch : layout.channels) {
    auto attended = encode_channel(g, cfg, layout, ch, doc);
    out.channel_vectors.push_back(attended.document);
    out.alphas.push_back(std::move(attended.alphas));
  }
  out.fused = fuse(g, out.channel_vectors, cfg.mode);
  out.probs = classify(g, out.fused, layout);
  return out;
}

struct Prediction {
  std::vector<float> probs;
  std::vector<std::vector<float>> alphas;
  std::size_t label = 0;  // argmax, ties to the lowest class id
};

Prediction predict(const ModelParams& model, const TensorizedDocument& doc);

// Forward + backward of weight · (−log p_label) into `sink`; returns the
// unweighted document loss.
double document_gradient(const ModelParams& model, const TensorizedDocument& doc, float weight,
                         Gradients<float>& sink);

// 64-bit mean NLL over `docs`, for the finite-difference oracle.
Evaluation document_objective(const ModelConfig& cfg, const ModelLayout& layout, const BasicParams<double>& params,
                              const std::vector<TensorizedDocument>& docs, Gradients<double>* sink);

}  // namespace stylehan
