#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "stylehan/checkpoint.hpp"
#include "stylehan/config.hpp"

using namespace stylehan;
using namespace stylehan::testing;

namespace {

struct Trained {
  Checkpoint checkpoint;
  std::vector<TensorizedDocument> docs;
};

Trained trained_checkpoint(Mode mode, std::uint64_t seed, std::size_t epochs = 2) {
  SynthOptions o;
  o.authors = 3;
  o.docs_per_author = 4;
  const SynthCorpus corpus = generate_corpus(make_spec(o));
  const LabeledCorpus labeled = label_corpus(corpus.raw, corpus.tagged);
  Trained t;
  t.checkpoint.vocab = vocab_from_documents(labeled.docs, 50000);
  t.checkpoint.authors = labeled.authors;
  t.checkpoint.train.epochs = epochs;
  t.checkpoint.train.seed = seed;
  t.checkpoint.model = seeded_model(small_config(mode, 3, 4), t.checkpoint.vocab.size(), seed);
  t.docs = tensorize_all(labeled.docs, labeled.labels, t.checkpoint.vocab, t.checkpoint.model.config.grid());
  train(t.checkpoint.model, t.docs, {}, t.checkpoint.train);
  return t;
}

std::string error_of(std::string_view bytes) {
  try {
    parse_checkpoint(bytes);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("checkpoint round trip is bit-exact in every mode") {
  for (Mode mode : {Mode::style, Mode::lexical, Mode::syntactic, Mode::combined}) {
    const Trained t = trained_checkpoint(mode, 3);
    const std::string bytes = serialize_checkpoint(t.checkpoint);
    const Checkpoint back = parse_checkpoint(bytes);
    CHECK(serialize_checkpoint(back) == bytes);
    CHECK(back.model.config == t.checkpoint.model.config);
    CHECK(back.train == t.checkpoint.train);
    CHECK(back.vocab.words() == t.checkpoint.vocab.words());
    CHECK(back.authors == t.checkpoint.authors);
    for (std::size_t p = 0; p < back.model.params.size(); ++p) {
      CHECK(back.model.params.specs[p].name == t.checkpoint.model.params.specs[p].name);
      CHECK(std::memcmp(back.model.params.values[p].storage().data(),
                        t.checkpoint.model.params.values[p].storage().data(),
                        4 * back.model.params.values[p].size()) == 0);
    }
    for (const auto& doc : t.docs) {
      const Prediction a = predict(t.checkpoint.model, doc), b = predict(back.model, doc);
      CHECK(a.probs == b.probs);
      CHECK(a.alphas == b.alphas);
    }
  }
}

TEST_CASE("checkpoint file layout") {
  const Trained t = trained_checkpoint(Mode::style, 1, 0);
  const std::string bytes = serialize_checkpoint(t.checkpoint);
  CHECK(bytes.substr(0, 4) == "SHAN");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  std::uint64_t header_len = 0;
  for (int i = 0; i < 8; ++i) header_len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
  const auto header = nlohmann::json::parse(bytes.substr(16, header_len));
  for (const char* key : {"model_config", "train_config", "vocabulary", "tag_set", "authors", "tensors"})
    CHECK(header.contains(key));
  const ParamSet& params = t.checkpoint.model.params;
  REQUIRE(header["tensors"].size() == params.size());
  std::uint64_t offset = 0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    CHECK(header["tensors"][p]["name"] == params.specs[p].name);
    CHECK(header["tensors"][p]["offset"].get<std::uint64_t>() == offset);
    offset += 4 * params.values[p].size();
  }
  CHECK(bytes.size() == 16 + header_len + offset);
  // First payload float, little-endian.
  float first = 0;
  std::memcpy(&first, bytes.data() + 16 + header_len, 4);
  CHECK(first == params.values[0][0]);
}

TEST_CASE("identical seeds give identical checkpoint bytes") {
  const std::string a = serialize_checkpoint(trained_checkpoint(Mode::style, 7).checkpoint);
  const std::string b = serialize_checkpoint(trained_checkpoint(Mode::style, 7).checkpoint);
  const std::string c = serialize_checkpoint(trained_checkpoint(Mode::style, 8).checkpoint);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const std::string good = serialize_checkpoint(trained_checkpoint(Mode::style, 2, 0).checkpoint);

  std::string bytes = good;
  bytes[0] = 'X';
  CHECK(error_of(bytes).find("magic") != std::string::npos);
  CHECK(error_of("") .find("magic") != std::string::npos);

  bytes = good;
  bytes[4] = 9;
  CHECK(error_of(bytes).find("version") != std::string::npos);

  const std::string truncated = good.substr(0, good.size() - 10);
  const std::string msg = error_of(truncated);
  CHECK(msg.find("truncated payload") != std::string::npos);
  const std::size_t header_len = static_cast<unsigned char>(good[8]) | (static_cast<unsigned char>(good[9]) << 8) |
                                 (static_cast<unsigned char>(good[10]) << 16);
  const std::size_t payload = good.size() - 16 - header_len;
  CHECK(msg.find("expected " + std::to_string(payload)) != std::string::npos);
  CHECK(msg.find("got " + std::to_string(payload - 10)) != std::string::npos);

  CHECK(error_of(good + "xx").find("oversized") != std::string::npos);
  CHECK(error_of(good.substr(0, 12)).find("truncated") != std::string::npos);
  CHECK(error_of(good.substr(0, 40)).find("truncated header") != std::string::npos);

  // Renamed tensor in the manifest.
  bytes = good;
  const auto at = bytes.find("classifier.bias");
  REQUIRE(at != std::string::npos);
  bytes[at] = 'k';
  CHECK(error_of(bytes).find("expected 'classifier.bias'") != std::string::npos);

  // Header that is not JSON.
  bytes = good;
  bytes[16] = '!';
  CHECK(error_of(bytes).find("JSON") != std::string::npos);
}

TEST_CASE("checkpoint files") {
  const Trained t = trained_checkpoint(Mode::lexical, 4, 1);
  const auto path = (std::filesystem::temp_directory_path() / "stylehan_test.shn").string();
  save_checkpoint(t.checkpoint, path);
  const Checkpoint back = load_checkpoint(path);
  CHECK(serialize_checkpoint(back) == serialize_checkpoint(t.checkpoint));
  save_checkpoint(back, path + ".2");
  std::ifstream a(path, std::ios::binary), b(path + ".2", std::ios::binary);
  CHECK(std::string(std::istreambuf_iterator<char>(a), {}) == std::string(std::istreambuf_iterator<char>(b), {}));
  CHECK_THROWS_AS(load_checkpoint(path + ".missing"), std::runtime_error);
}

TEST_CASE("config text") {
  Settings s;
  apply_config_text(s, "# comment\n\nsentences_per_doc = 12  # trailing\nreceptive_fields=2, 3\nmode = combined-embed\n"
                       "freeze_lexical = true\nlearning_rate = 0.01\nl2_power = 1\nvocab_limit = 99\n");
  CHECK(s.model.sentences_per_doc == 12);
  CHECK(s.model.receptive_fields == std::vector<std::size_t>{2, 3});
  CHECK(s.model.mode == Mode::combined);
  CHECK(s.model.freeze_lexical);
  CHECK(s.train.learning_rate == 0.01);
  CHECK(s.train.l2_power == 1);
  CHECK(s.vocab_limit == 99);

  try {
    apply_config_text(s, "epochs = 3\nbogus = 1\n", "f.cfg");
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()) == "f.cfg line 2: unknown config key 'bogus'");
  }
  CHECK_THROWS_AS(apply_config_text(s, "epochs = many\n"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_text(s, "epochs\n"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_text(s, "mode = fancy\n"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_text(s, "learning_rate = 1e-3x\n"), std::invalid_argument);
}

TEST_CASE("settings text round trip") {
  Settings s;
  s.model = ModelConfig::preset("blogs");
  s.model.mode = Mode::syntactic;
  s.train.learning_rate = 0.1 + 0.2;  // not exactly representable in short form
  s.train.seed = 123456789012345ULL;
  Settings back;
  apply_config_text(back, settings_to_text(s));
  CHECK(back.model == s.model);
  CHECK(back.train == s.train);
  CHECK(back.vocab_limit == s.vocab_limit);
}

TEST_CASE("presets") {
  CHECK(ModelConfig::preset("ccat").words_per_sentence == 30);
  CHECK(ModelConfig::preset("blogs").words_per_sentence == 20);
  CHECK(ModelConfig::preset("ccat").sentences_per_doc == 40);
  CHECK_THROWS_AS(ModelConfig::preset("imdb"), std::invalid_argument);
}

TEST_CASE("config JSON round trip") {
  ModelConfig m = small_config(Mode::combined, 5, 6);
  m.freeze_lexical = true;
  CHECK(model_config_from_json(to_json(m)) == m);
  TrainConfig t;
  t.l2 = 0.125;
  t.seed = 77;
  CHECK(train_config_from_json(to_json(t)) == t);
  auto j = to_json(m);
  j["receptive_fields"] = nlohmann::json::array();
  CHECK_THROWS_AS(model_config_from_json(j), std::invalid_argument);
}
