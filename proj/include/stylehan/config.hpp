#pragma once

#include <string>

#include "json.hpp"
#include "stylehan/model.hpp"
#include "stylehan/trainer.hpp"

namespace stylehan {

// Everything a training command can be configured with.
struct Settings {
  ModelConfig model;
  TrainConfig train;
  std::size_t vocab_limit = 50000;
};

// Flat `key = value` config files. '#' starts a comment; blank lines are
// ignored. Keys:
//   sentences_per_doc, words_per_sentence, d_w, d_p, receptive_fields (e.g. 3,4,5),
//   filters_per_size, lstm_hidden, attention_dim, mode, freeze_lexical (true/false),
//   batch_size, epochs, learning_rate, beta1, beta2, epsilon, l2, l2_power, seed,
//   runs, val_fraction, vocab_limit
// Unknown keys and malformed values throw std::invalid_argument naming the
// line.
void apply_setting(Settings& settings, const std::string& key, const std::string& value);
void apply_config_file(Settings& settings, const std::string& path);
void apply_config_text(Settings& settings, const std::string& text, const std::string& origin = "<config>");

// The same keys, one per line, in the order listed above.
std::string settings_to_text(const Settings& settings);

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace stylehan
