#include "stylehan/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace stylehan {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::style: return "style";
    case Mode::lexical: return "lexical";
    case Mode::syntactic: return "syntactic";
    case Mode::combined: return "combined-embed";
  }
  return "?";
}

Mode parse_mode(const std::string& text) {
  if (text == "style") return Mode::style;
  if (text == "lexical") return Mode::lexical;
  if (text == "syntactic") return Mode::syntactic;
  if (text == "combined-embed" || text == "combined") return Mode::combined;
  throw std::invalid_argument("unknown mode '" + text + "' (expected style, lexical, syntactic or combined-embed)");
}

std::string to_string(Channel channel) {
  switch (channel) {
    case Channel::lexical: return "lexical";
    case Channel::syntactic: return "syntactic";
    case Channel::combined: return "combined";
  }
  return "?";
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("model config: " + m); };
  if (sentences_per_doc < 1) fail("sentences_per_doc must be at least 1");
  if (receptive_fields.empty()) fail("receptive_fields must not be empty");
  std::size_t widest = 0;
  for (std::size_t r : receptive_fields) {
    if (r < 1) fail("receptive fields must be at least 1");
    widest = std::max(widest, r);
  }
  if (words_per_sentence < widest)
    fail("words_per_sentence (" + std::to_string(words_per_sentence) + ") is smaller than the largest receptive field (" +
         std::to_string(widest) + ")");
  if (d_w < 1 || d_p < 1) fail("embedding dimensions must be positive");
  if (filters_per_size < 1) fail("filters_per_size must be positive");
  if (lstm_hidden < 1) fail("lstm_hidden must be positive");
  if (attention_dim < 1) fail("attention_dim must be positive");
  if (num_classes < 2) fail("num_classes must be at least 2");
}

ModelConfig ModelConfig::preset(const std::string& name) {
  ModelConfig cfg;
  cfg.sentences_per_doc = 40;
  if (name == "ccat")
    cfg.words_per_sentence = 30;
  else if (name == "blogs")
    cfg.words_per_sentence = 20;
  else
    throw std::invalid_argument("unknown preset '" + name + "' (expected ccat or blogs)");
  return cfg;
}

namespace {

LstmLayout add_lstm(ParamSet& p, const std::string& prefix, std::size_t in, std::size_t hidden) {
  LstmLayout l{};
  l.w_input = p.add({prefix + ".w_input", {4 * hidden, in}});
  l.w_hidden = p.add({prefix + ".w_hidden", {4 * hidden, hidden}});
  l.bias = p.add({prefix + ".bias", {4 * hidden}});
  return l;
}

ChannelLayout add_channel(ParamSet& p, const ModelConfig& cfg, Channel kind, std::size_t input_dim) {
  ChannelLayout ch{};
  ch.kind = kind;
  ch.input_dim = input_dim;
  const std::string name = to_string(kind);
  for (std::size_t r : cfg.receptive_fields) {
    const std::string prefix = name + ".conv.r" + std::to_string(r);
    ch.conv_weight.push_back(p.add({prefix + ".weight", {cfg.filters_per_size, r * input_dim}}));
    ch.conv_bias.push_back(p.add({prefix + ".bias", {cfg.filters_per_size}}));
  }
  const std::size_t hidden = cfg.lstm_hidden;
  ch.forward = add_lstm(p, name + ".lstm.fwd", cfg.sentence_dim(), hidden);
  ch.backward = add_lstm(p, name + ".lstm.bwd", cfg.sentence_dim(), hidden);
  ch.attn_weight = p.add({name + ".attn.weight", {cfg.attention_dim, 2 * hidden}});
  ch.attn_bias = p.add({name + ".attn.bias", {cfg.attention_dim}});
  ch.attn_context = p.add({name + ".attn.context", {cfg.attention_dim}});
  return ch;
}

void fill_uniform(Tensor& t, float limit, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(-limit, limit);
  for (float& v : t.storage()) v = u(rng);
}

float glorot(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
}

}  // namespace

ModelParams create_model(const ModelConfig& config, std::size_t vocab_size) {
  config.validate();
  ModelParams m;
  m.config = config;
  ParamSet& p = m.params;
  if (config.uses_lexical()) {
    if (vocab_size < 3) throw std::invalid_argument("vocabulary must hold at least one word besides PAD and UNK");
    m.layout.lexical_table = p.add({"embed.lexical", {vocab_size, config.d_w}, true, !config.freeze_lexical});
  }
  if (config.uses_syntactic())
    m.layout.syntactic_table = p.add({"embed.syntactic", {TagSet::kIdCount, config.d_p}, true, true});
  switch (config.mode) {
    case Mode::style:
      m.layout.channels.push_back(add_channel(p, config, Channel::lexical, config.d_w));
      m.layout.channels.push_back(add_channel(p, config, Channel::syntactic, config.d_p));
      break;
    case Mode::lexical:
      m.layout.channels.push_back(add_channel(p, config, Channel::lexical, config.d_w));
      break;
    case Mode::syntactic:
      m.layout.channels.push_back(add_channel(p, config, Channel::syntactic, config.d_p));
      break;
    case Mode::combined:
      m.layout.channels.push_back(add_channel(p, config, Channel::combined, config.d_w + config.d_p));
      break;
  }
  m.layout.classifier_weight = p.add({"classifier.weight", {config.num_classes, config.fusion_dim()}});
  m.layout.classifier_bias = p.add({"classifier.bias", {config.num_classes}});
  return m;
}

void initialize_model(ModelParams& model, std::uint64_t seed, const LexicalEmbeddingTable* lexical) {
  const ModelConfig& cfg = model.config;
  const ModelLayout& layout = model.layout;
  auto rng_for = [seed](std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), 0x5e17u};
    return std::mt19937_64(seq);
  };
  auto& values = model.params.values;
  for (auto& v : values) std::fill(v.storage().begin(), v.storage().end(), 0.0f);

  if (layout.lexical_table) {
    Tensor& table = values[*layout.lexical_table];
    if (lexical) {
      if (lexical->table.shape() != table.shape())
        throw DimensionError("lexical table " + shape_to_string(lexical->table.shape()) + " does not match model " +
                             shape_to_string(table.shape()));
      table = lexical->table;
    } else {
      auto rng = rng_for(*layout.lexical_table);
      std::normal_distribution<float> normal(0.0f, kFallbackStddev);
      for (std::size_t row = 1; row < table.dim(0); ++row)
        for (std::size_t c = 0; c < table.dim(1); ++c) table.at(row, c) = normal(rng);
    }
  }
  if (layout.syntactic_table)
    values[*layout.syntactic_table] = init_syntactic(seed ^ 0x9e3779b97f4a7c15ull, cfg.d_p).table;

  const std::size_t hidden = cfg.lstm_hidden;
  for (const auto& ch : layout.channels) {
    for (std::size_t k = 0; k < ch.conv_weight.size(); ++k) {
      auto rng = rng_for(ch.conv_weight[k]);
      const std::size_t r = cfg.receptive_fields[k];
      fill_uniform(values[ch.conv_weight[k]], glorot(r * ch.input_dim, cfg.filters_per_size), rng);
    }
    for (const LstmLayout* cell : {&ch.forward, &ch.backward}) {
      auto rng_in = rng_for(cell->w_input);
      fill_uniform(values[cell->w_input], glorot(cfg.sentence_dim(), 4 * hidden), rng_in);
      auto rng_h = rng_for(cell->w_hidden);
      fill_uniform(values[cell->w_hidden], 0.05f, rng_h);
      Tensor& bias = values[cell->bias];
      for (std::size_t k = hidden; k < 2 * hidden; ++k) bias[k] = 1.0f;
    }
    auto rng_w = rng_for(ch.attn_weight);
    fill_uniform(values[ch.attn_weight], glorot(2 * hidden, cfg.attention_dim), rng_w);
    auto rng_u = rng_for(ch.attn_context);
    fill_uniform(values[ch.attn_context], glorot(cfg.attention_dim, 1), rng_u);
  }
  auto rng_c = rng_for(layout.classifier_weight);
  fill_uniform(values[layout.classifier_weight], glorot(cfg.fusion_dim(), cfg.num_classes), rng_c);
}

Prediction predict(const ModelParams& model, const TensorizedDocument& doc) {
  Graph<float> g(&model.params, nullptr);
  auto fwd = forward_document(g, model.config, model.layout, doc);
  Prediction out;
  out.probs = g.to_vector(fwd.probs);
  out.alphas = std::move(fwd.alphas);
  for (std::size_t c = 1; c < out.probs.size(); ++c)
    if (out.probs[c] > out.probs[out.label]) out.label = c;
  return out;
}

double document_gradient(const ModelParams& model, const TensorizedDocument& doc, float weight,
                         Gradients<float>& sink) {
  Graph<float> g(&model.params, &sink);
  auto fwd = forward_document(g, model.config, model.layout, doc);
  Var loss = ops::nll(g, fwd.probs, doc.label);
  const double value = g.scalar(loss);
  g.backward(ops::scale(g, loss, weight));
  return value;
}

Evaluation document_objective(const ModelConfig& cfg, const ModelLayout& layout, const BasicParams<double>& params,
                              const std::vector<TensorizedDocument>& docs, Gradients<double>* sink) {
  Graph<double> g(&params, sink);
  std::vector<Var> losses;
  for (const auto& doc : docs) {
    auto fwd = forward_document(g, cfg, layout, doc);
    losses.push_back(ops::nll(g, fwd.probs, doc.label));
  }
  Var total = ops::scale(g, ops::sum(g, ops::concat(g, losses)), 1.0 / static_cast<double>(docs.size()));
  if (sink) g.backward(total);
  return {g.scalar(total), g.kink_signature()};
}

}  // namespace stylehan
