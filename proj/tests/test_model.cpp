#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "stylehan/model.hpp"
#include "stylehan/model_check.hpp"

using namespace stylehan;
using namespace stylehan::testing;

namespace {

ModelParams tiny_model(Mode mode, std::uint64_t seed) {
  ModelParams m = create_model(tiny_config(mode), kTinyVocab);
  initialize_model(m, seed);
  return m;
}

// One-field conv channel with explicit weights, for encoder examples.
ChannelLayout conv_only_channel(ParamSet& p, std::size_t d, std::size_t filters, std::vector<float> w,
                                std::vector<float> b) {
  ChannelLayout ch{};
  ch.input_dim = d;
  const std::size_t r = w.size() / (filters * d);
  ch.conv_weight.push_back(p.add({"w", {filters, r * d}}));
  ch.conv_bias.push_back(p.add({"b", {filters}}));
  p.values[ch.conv_weight[0]].storage() = std::move(w);
  p.values[ch.conv_bias[0]].storage() = std::move(b);
  return ch;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar-loop 64-bit LSTM over `xs` (in the given order) with gate blocks
// input, forget, output, candidate.
std::vector<std::vector<double>> lstm_oracle(const ParamSet& p, const LstmLayout& cell,
                                             const std::vector<std::vector<double>>& xs, std::size_t hidden) {
  const Tensor &wx = p.values[cell.w_input], &wh = p.values[cell.w_hidden], &b = p.values[cell.bias];
  const std::size_t in = wx.dim(1);
  std::vector<double> h(hidden, 0.0), c(hidden, 0.0);
  std::vector<std::vector<double>> out;
  for (const auto& x : xs) {
    std::vector<double> z(4 * hidden);
    for (std::size_t row = 0; row < 4 * hidden; ++row) {
      double acc = b[row];
      for (std::size_t k = 0; k < in; ++k) acc += static_cast<double>(wx.at(row, k)) * x[k];
      for (std::size_t k = 0; k < hidden; ++k) acc += static_cast<double>(wh.at(row, k)) * h[k];
      z[row] = acc;
    }
    for (std::size_t j = 0; j < hidden; ++j) {
      const double i = sigmoid(z[j]), f = sigmoid(z[hidden + j]), o = sigmoid(z[2 * hidden + j]);
      const double gg = std::tanh(z[3 * hidden + j]);
      c[j] = f * c[j] + i * gg;
      h[j] = o * std::tanh(c[j]);
    }
    out.push_back(h);
  }
  return out;
}

std::vector<float> channel_vector(const ModelParams& m, std::size_t channel, const TensorizedDocument& doc) {
  Graph<float> g(&m.params);
  auto att = encode_channel(g, m.config, m.layout, m.layout.channels[channel], doc);
  return g.to_vector(att.document);
}

}  // namespace

TEST_CASE("word encoder examples") {
  ParamSet p;
  // Z = {2}, one filter, the tensor-core conv example: relu(max([2, 1])) = 2.
  auto ch = conv_only_channel(p, 2, 1, {1, 0, 0, 1}, {0});
  Graph<float> g(&p);
  CHECK(g.to_vector(encode_words_cnn(g, g.constant({3, 2}, {1, 0, 0, 1, 1, 1}), ch)) == std::vector<float>{2});

  ParamSet zp;
  auto zero = conv_only_channel(zp, 2, 3, std::vector<float>(12, 0), {0, 0, 0});
  Graph<float> zg(&zp);
  CHECK(zg.to_vector(encode_words_cnn(zg, zg.constant({4, 2}, {1, 2, 3, 4, 5, 6, 7, 8}), zero)) ==
        std::vector<float>{0, 0, 0});
}

TEST_CASE("word encoder output length is |Z| times filters per size") {
  std::mt19937_64 rng(2);
  for (Mode mode : {Mode::style, Mode::lexical, Mode::syntactic, Mode::combined}) {
    auto m = tiny_model(mode, 3);
    auto doc = random_document(m.config, kTinyVocab, 3, 0, rng);
    for (const auto& ch : m.layout.channels) {
      Graph<float> g(&m.params);
      Var h = encode_words_cnn(g, model_ops::sentence_input(g, m.layout, ch, doc, 0), ch);
      CHECK(g.size(h) == m.config.receptive_fields.size() * m.config.filters_per_size);
    }
  }
}

TEST_CASE("max pooling absorbs a one-position shift when padding keeps the windows intact") {
  ParamSet p;
  auto ch = conv_only_channel(p, 1, 1, {1, 1}, {0});
  Graph<float> g(&p);
  auto left = g.to_vector(encode_words_cnn(g, g.constant({5, 1}, {1, 5, 5, 1, 0}), ch));
  auto right = g.to_vector(encode_words_cnn(g, g.constant({5, 1}, {0, 1, 5, 5, 1}), ch));
  CHECK(left == right);
  CHECK(left == std::vector<float>{10});
}

TEST_CASE("zero-weight BiLSTM emits zeros") {
  auto m = tiny_model(Mode::lexical, 1);
  const auto& ch = m.layout.channels[0];
  for (const LstmLayout* cell : {&ch.forward, &ch.backward})
    for (std::size_t idx : {cell->w_input, cell->w_hidden, cell->bias})
      std::fill(m.params.values[idx].storage().begin(), m.params.values[idx].storage().end(), 0.0f);
  Graph<float> g(&m.params);
  const std::size_t k = m.config.sentence_dim();
  std::vector<Var> xs = {g.constant({k}, std::vector<float>(k, 1.5f)), g.constant({k}, std::vector<float>(k, -2.0f)),
                         g.zeros({k})};
  auto hs = encode_sentences_bilstm(g, xs, {1, 1, 0}, ch, m.config.lstm_hidden);
  for (Var h : hs)
    for (float v : g.to_vector(h)) CHECK(v == 0.0f);
}

TEST_CASE("a single sentence is one step in both directions") {
  auto m = tiny_model(Mode::lexical, 4);
  const auto& ch = m.layout.channels[0];
  m.params.values[ch.backward.w_input] = m.params.values[ch.forward.w_input];
  m.params.values[ch.backward.w_hidden] = m.params.values[ch.forward.w_hidden];
  m.params.values[ch.backward.bias] = m.params.values[ch.forward.bias];
  Graph<float> g(&m.params);
  const std::size_t k = m.config.sentence_dim(), hidden = m.config.lstm_hidden;
  std::vector<float> x(k);
  for (std::size_t i = 0; i < k; ++i) x[i] = 0.1f * static_cast<float>(i) - 0.2f;
  auto hs = encode_sentences_bilstm(g, {g.constant({k}, x), g.zeros({k}), g.zeros({k})}, {1, 0, 0}, ch, hidden);
  auto h = g.to_vector(hs[0]);
  for (std::size_t j = 0; j < hidden; ++j) CHECK(h[j] == h[hidden + j]);
  CHECK_THROWS_AS(encode_sentences_bilstm(g, {g.zeros({k})}, {1, 0}, ch, hidden), DimensionError);
}

TEST_CASE("BiLSTM matches a 64-bit scalar-loop recurrence") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<float> u(-1, 1);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto m = tiny_model(Mode::syntactic, seed);
    const auto& ch = m.layout.channels[0];
    for (const LstmLayout* cell : {&ch.forward, &ch.backward})
      for (float& v : m.params.values[cell->bias].storage()) v += 0.5f * u(rng);
    const std::size_t k = m.config.sentence_dim(), hidden = m.config.lstm_hidden, real = 1 + seed % 3;
    std::vector<std::vector<double>> xs(real, std::vector<double>(k));
    Graph<float> g(&m.params);
    std::vector<Var> vars;
    for (std::size_t t = 0; t < 3; ++t) {
      if (t < real) {
        std::vector<float> x(k);
        for (std::size_t i = 0; i < k; ++i) x[i] = u(rng);
        xs[t].assign(x.begin(), x.end());
        vars.push_back(g.constant({k}, x));
      } else {
        vars.push_back(g.zeros({k}));
      }
    }
    std::vector<std::uint8_t> mask(3, 0);
    for (std::size_t t = 0; t < real; ++t) mask[t] = 1;
    auto hs = encode_sentences_bilstm(g, vars, mask, ch, hidden);

    auto fwd = lstm_oracle(m.params, ch.forward, xs, hidden);
    auto reversed = xs;
    std::reverse(reversed.begin(), reversed.end());
    auto bwd = lstm_oracle(m.params, ch.backward, reversed, hidden);
    std::reverse(bwd.begin(), bwd.end());
    for (std::size_t t = 0; t < 3; ++t) {
      auto h = g.to_vector(hs[t]);
      for (std::size_t j = 0; j < hidden; ++j) {
        CHECK(std::fabs(h[j] - (t < real ? fwd[t][j] : 0.0)) < 1e-5);
        CHECK(std::fabs(h[hidden + j] - (t < real ? bwd[t][j] : 0.0)) < 1e-5);
      }
    }
  }
}

TEST_CASE("attention examples") {
  auto m = tiny_model(Mode::lexical, 9);
  const auto& ch = m.layout.channels[0];
  const std::size_t width = 2 * m.config.lstm_hidden;
  std::vector<float> h1 = {0.3f, -0.7f, 0.2f, 0.9f, -0.1f, 0.5f}, h2 = {-0.4f, 0.1f, 0.8f, -0.6f, 0.3f, 0.2f};
  REQUIRE(h1.size() == width);

  Graph<float> g(&m.params);
  auto one = attend(g, {g.constant({width}, h1), g.zeros({width}), g.zeros({width})}, {1, 0, 0}, ch);
  CHECK(one.alphas == std::vector<float>{1, 0, 0});
  CHECK(g.to_vector(one.document) == h1);

  auto same = attend(g, {g.constant({width}, h2), g.constant({width}, h2)}, {1, 1}, ch);
  CHECK(same.alphas == std::vector<float>{0.5f, 0.5f});

  auto base = attend(g, {g.constant({width}, h1), g.constant({width}, h2)}, {1, 1}, ch);
  auto padded = attend(g, {g.constant({width}, h1), g.constant({width}, h2), g.zeros({width})}, {1, 1, 0}, ch);
  CHECK(g.to_vector(base.document) == g.to_vector(padded.document));

  CHECK_THROWS(attend(g, {g.zeros({width})}, {0}, ch));
}

TEST_CASE("fuse and classify examples") {
  Graph<float> g;
  Var a = g.constant({2}, {1, 2}), b = g.constant({2}, {3, 4});
  CHECK(g.to_vector(fuse(g, {a, b}, Mode::style)) == std::vector<float>{1, 2, 3, 4});
  CHECK(g.to_vector(fuse(g, {a}, Mode::lexical)) == std::vector<float>{1, 2});
  CHECK_THROWS_AS(fuse(g, {a}, Mode::style), DimensionError);

  for (Mode mode : {Mode::style, Mode::lexical}) {
    auto m = tiny_model(mode, 2);
    CHECK(m.params.values[m.layout.classifier_weight].dim(1) == (mode == Mode::style ? 4u : 2u) * 3u);
    std::fill(m.params.values[m.layout.classifier_weight].storage().begin(),
              m.params.values[m.layout.classifier_weight].storage().end(), 0.0f);
    const std::size_t width = m.config.fusion_dim();
    std::vector<float> v(width, 0.7f);
    Graph<float> cg(&m.params);
    CHECK(cg.to_vector(classify(cg, cg.constant({width}, v), m.layout)) == std::vector<float>{0.5f, 0.5f});
    CHECK_THROWS_AS(classify(cg, cg.constant({width + 1}, std::vector<float>(width + 1)), m.layout), DimensionError);

    m.params.values[m.layout.classifier_bias].storage() = {std::log(2.0f), 0.0f};
    Graph<float> lg(&m.params);
    auto p = lg.to_vector(classify(lg, lg.constant({width}, v), m.layout));
    CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-6));

    for (float& x : m.params.values[m.layout.classifier_bias].storage()) x += 3.25f;
    Graph<float> sg(&m.params);
    auto shifted = sg.to_vector(classify(sg, sg.constant({width}, v), m.layout));
    for (std::size_t c = 0; c < 2; ++c) CHECK(std::fabs(shifted[c] - p[c]) < 1e-6);
  }
}

TEST_CASE("forward shape law and zero classifier") {
  std::mt19937_64 rng(8);
  for (Mode mode : {Mode::style, Mode::lexical, Mode::syntactic, Mode::combined}) {
    auto m = tiny_model(mode, 5);
    auto doc = random_document(m.config, kTinyVocab, 2, 1, rng);
    auto pred = predict(m, doc);
    CHECK(pred.probs.size() == m.config.num_classes);
    CHECK(pred.alphas.size() == (mode == Mode::style ? 2u : 1u));
    for (const auto& a : pred.alphas) CHECK(a.size() == m.config.sentences_per_doc);

    auto& w = m.params.values[m.layout.classifier_weight].storage();
    std::fill(w.begin(), w.end(), 0.0f);
    CHECK(predict(m, doc).probs == std::vector<float>{0.5f, 0.5f});
  }
}

TEST_CASE("style output equals classify(fuse(independently computed channels))") {
  std::mt19937_64 rng(12);
  auto m = tiny_model(Mode::style, 21);
  for (int trial = 0; trial < 10; ++trial) {
    auto doc = random_document(m.config, kTinyVocab, 1 + trial % 3, 0, rng);
    auto lex = channel_vector(m, 0, doc), syn = channel_vector(m, 1, doc);
    Graph<float> g(&m.params);
    Var v = fuse(g, {g.constant({lex.size()}, lex), g.constant({syn.size()}, syn)}, Mode::style);
    CHECK(g.to_vector(classify(g, v, m.layout)) == predict(m, doc).probs);
  }
}

TEST_CASE("style channels are independent") {
  std::mt19937_64 rng(31);
  auto m = tiny_model(Mode::style, 6);
  auto doc = random_document(m.config, kTinyVocab, 3, 0, rng, 3);
  const auto lex = channel_vector(m, 0, doc), syn = channel_vector(m, 1, doc);
  for (std::size_t p = 0; p < m.params.size(); ++p) {
    const std::string& name = m.params.specs[p].name;
    const bool syntactic = name.rfind("syntactic.", 0) == 0 || name == "embed.syntactic";
    const bool lexical = name.rfind("lexical.", 0) == 0 || name == "embed.lexical";
    if (!syntactic && !lexical) continue;
    auto perturbed = m;
    for (float& v : perturbed.params.values[p].storage()) v += 0.25f;
    if (syntactic) {
      CHECK(channel_vector(perturbed, 0, doc) == lex);
      CHECK(channel_vector(perturbed, 1, doc) != syn);
    } else {
      CHECK(channel_vector(perturbed, 1, doc) == syn);
      CHECK(channel_vector(perturbed, 0, doc) != lex);
    }
  }
}

TEST_CASE("appending pad sentences never changes probabilities") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 100; ++trial) {
    const Mode mode = static_cast<Mode>(trial % 4);
    auto m = tiny_model(mode, 1000 + trial);
    auto doc = random_document(m.config, kTinyVocab, 1 + trial % 3, trial % 2, rng);
    const auto base = predict(m, doc);
    const std::size_t extra = 1 + trial % 4;
    auto wide = m;
    wide.config.sentences_per_doc += extra;
    const auto padded = predict(wide, with_sentence_rows(doc, wide.config.sentences_per_doc));
    CHECK(padded.probs == base.probs);
  }
}

TEST_CASE("attention weights are a distribution over real sentences") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 40; ++trial) {
    auto m = tiny_model(static_cast<Mode>(trial % 4), trial);
    auto doc = random_document(m.config, kTinyVocab, 1 + trial % 3, 0, rng);
    for (const auto& alphas : predict(m, doc).alphas) {
      double total = 0;
      for (std::size_t i = 0; i < alphas.size(); ++i) {
        CHECK(alphas[i] >= 0.0f);
        if (!doc.sentence_mask[i]) CHECK(alphas[i] == 0.0f);
        total += alphas[i];
      }
      CHECK(std::fabs(total - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("sentence order matters") {
  std::mt19937_64 rng(99);
  auto m = tiny_model(Mode::style, 17);
  auto doc = random_document(m.config, kTinyVocab, 3, 0, rng, 3);
  auto swapped = doc;
  const std::size_t n = m.config.words_per_sentence;
  std::swap_ranges(swapped.word_ids.begin(), swapped.word_ids.begin() + n, swapped.word_ids.begin() + n);
  std::swap_ranges(swapped.tag_ids.begin(), swapped.tag_ids.begin() + n, swapped.tag_ids.begin() + n);
  CHECK(predict(m, doc).probs != predict(m, swapped).probs);
}

TEST_CASE("document grid must match the model") {
  std::mt19937_64 rng(1);
  auto m = tiny_model(Mode::style, 1);
  auto doc = with_sentence_rows(random_document(m.config, kTinyVocab, 2, 0, rng), 5);
  CHECK_THROWS_AS(predict(m, doc), DimensionError);
}

TEST_CASE("full-model gradients match finite differences in every mode") {
  for (Mode mode : {Mode::style, Mode::lexical, Mode::syntactic, Mode::combined}) {
    auto report = check_model_gradients(mode, 3);
    INFO(to_string(mode) << " max relative error " << report.max_rel_error);
    CHECK(report.passed(1e-4));
    CHECK(report.checked > 300);
    CHECK(report.groups.size() == create_model(tiny_config(mode), kTinyVocab).params.size());
  }
}

TEST_CASE("parameter enumeration order") {
  auto m = tiny_model(Mode::style, 0);
  std::vector<std::string> names;
  for (const auto& s : m.params.specs) names.push_back(s.name);
  REQUIRE(names.size() >= 4);
  CHECK(names[0] == "embed.lexical");
  CHECK(names[1] == "embed.syntactic");
  CHECK(names[2] == "lexical.conv.r2.weight");
  CHECK(names[names.size() - 2] == "classifier.weight");
  CHECK(names.back() == "classifier.bias");
  const auto& bias = m.params.values[m.layout.channels[0].forward.bias];
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(bias[k] == 0.0f);
    CHECK(bias[3 + k] == 1.0f);
  }
}
