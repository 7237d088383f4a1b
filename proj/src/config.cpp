#include "stylehan/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stylehan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw std::invalid_argument(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_count(key, trim(item)));
  if (out.empty()) throw std::invalid_argument(key + ": expected a comma-separated list");
  return out;
}

std::string join(const std::vector<std::size_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

std::string real_text(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

}  // namespace

void apply_setting(Settings& s, const std::string& key, const std::string& value) {
  ModelConfig& m = s.model;
  TrainConfig& t = s.train;
  if (key == "sentences_per_doc") m.sentences_per_doc = parse_count(key, value);
  else if (key == "words_per_sentence") m.words_per_sentence = parse_count(key, value);
  else if (key == "d_w") m.d_w = parse_count(key, value);
  else if (key == "d_p") m.d_p = parse_count(key, value);
  else if (key == "receptive_fields") m.receptive_fields = parse_list(key, value);
  else if (key == "filters_per_size") m.filters_per_size = parse_count(key, value);
  else if (key == "lstm_hidden") m.lstm_hidden = parse_count(key, value);
  else if (key == "attention_dim") m.attention_dim = parse_count(key, value);
  else if (key == "mode") m.mode = parse_mode(value);
  else if (key == "freeze_lexical") m.freeze_lexical = parse_bool(key, value);
  else if (key == "batch_size") t.batch_size = parse_count(key, value);
  else if (key == "epochs") t.epochs = parse_count(key, value);
  else if (key == "learning_rate") t.learning_rate = parse_real(key, value);
  else if (key == "beta1") t.beta1 = parse_real(key, value);
  else if (key == "beta2") t.beta2 = parse_real(key, value);
  else if (key == "epsilon") t.epsilon = parse_real(key, value);
  else if (key == "l2") t.l2 = parse_real(key, value);
  else if (key == "l2_power") t.l2_power = static_cast<int>(parse_count(key, value));
  else if (key == "seed") t.seed = parse_count(key, value);
  else if (key == "runs") t.runs = parse_count(key, value);
  else if (key == "val_fraction") t.val_fraction = parse_real(key, value);
  else if (key == "vocab_limit") s.vocab_limit = parse_count(key, value);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

void apply_config_text(Settings& settings, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    try {
      if (eq == std::string::npos) throw std::invalid_argument("expected key = value");
      apply_setting(settings, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(origin + " line " + std::to_string(number) + ": " + e.what());
    }
  }
}

void apply_config_file(Settings& settings, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(settings, text.str(), path);
}

std::string settings_to_text(const Settings& s) {
  const ModelConfig& m = s.model;
  const TrainConfig& t = s.train;
  std::ostringstream out;
  out << "sentences_per_doc = " << m.sentences_per_doc << '\n'
      << "words_per_sentence = " << m.words_per_sentence << '\n'
      << "d_w = " << m.d_w << '\n'
      << "d_p = " << m.d_p << '\n'
      << "receptive_fields = " << join(m.receptive_fields) << '\n'
      << "filters_per_size = " << m.filters_per_size << '\n'
      << "lstm_hidden = " << m.lstm_hidden << '\n'
      << "attention_dim = " << m.attention_dim << '\n'
      << "mode = " << to_string(m.mode) << '\n'
      << "freeze_lexical = " << (m.freeze_lexical ? "true" : "false") << '\n'
      << "batch_size = " << t.batch_size << '\n'
      << "epochs = " << t.epochs << '\n'
      << "learning_rate = " << real_text(t.learning_rate) << '\n'
      << "beta1 = " << real_text(t.beta1) << '\n'
      << "beta2 = " << real_text(t.beta2) << '\n'
      << "epsilon = " << real_text(t.epsilon) << '\n'
      << "l2 = " << real_text(t.l2) << '\n'
      << "l2_power = " << t.l2_power << '\n'
      << "seed = " << t.seed << '\n'
      << "runs = " << t.runs << '\n'
      << "val_fraction = " << real_text(t.val_fraction) << '\n'
      << "vocab_limit = " << s.vocab_limit << '\n';
  return out.str();
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"sentences_per_doc", c.sentences_per_doc},
          {"words_per_sentence", c.words_per_sentence},
          {"d_w", c.d_w},
          {"d_p", c.d_p},
          {"receptive_fields", c.receptive_fields},
          {"filters_per_size", c.filters_per_size},
          {"lstm_hidden", c.lstm_hidden},
          {"attention_dim", c.attention_dim},
          {"num_classes", c.num_classes},
          {"mode", to_string(c.mode)},
          {"freeze_lexical", c.freeze_lexical}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.sentences_per_doc = j.at("sentences_per_doc").get<std::size_t>();
  c.words_per_sentence = j.at("words_per_sentence").get<std::size_t>();
  c.d_w = j.at("d_w").get<std::size_t>();
  c.d_p = j.at("d_p").get<std::size_t>();
  c.receptive_fields = j.at("receptive_fields").get<std::vector<std::size_t>>();
  c.filters_per_size = j.at("filters_per_size").get<std::size_t>();
  c.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
  c.attention_dim = j.at("attention_dim").get<std::size_t>();
  c.num_classes = j.at("num_classes").get<std::size_t>();
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.freeze_lexical = j.at("freeze_lexical").get<bool>();
  c.validate();
  return c;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size}, {"epochs", c.epochs}, {"learning_rate", c.learning_rate},
          {"beta1", c.beta1},           {"beta2", c.beta2},   {"epsilon", c.epsilon},
          {"l2", c.l2},                 {"l2_power", c.l2_power}, {"seed", c.seed},
          {"runs", c.runs},             {"val_fraction", c.val_fraction}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.l2 = j.at("l2").get<double>();
  c.l2_power = j.at("l2_power").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.runs = j.at("runs").get<std::size_t>();
  c.val_fraction = j.at("val_fraction").get<double>();
  c.validate();
  return c;
}

}  // namespace stylehan
