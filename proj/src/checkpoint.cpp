#include "stylehan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "stylehan/config.hpp"

namespace stylehan {

namespace {

constexpr char kMagic[4] = {'S', 'H', 'A', 'N'};
constexpr std::size_t kPreamble = 4 + 4 + 8;

template <class U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <class U>
U get_le(std::string_view bytes, std::size_t at) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    value |= static_cast<U>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  return value;
}

[[noreturn]] void bad(const std::string& message) { throw FormatError("checkpoint: " + message); }

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  const ParamSet& params = c.model.params;
  nlohmann::json tensors = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    tensors.push_back({{"name", params.specs[p].name}, {"shape", params.specs[p].shape}, {"offset", offset}});
    offset += 4 * params.values[p].size();
  }
  const nlohmann::json header = {{"model_config", to_json(c.model.config)},
                                 {"train_config", to_json(c.train)},
                                 {"vocabulary", c.vocab.words()},
                                 {"tag_set", TagSet::standard().names()},
                                 {"authors", c.authors},
                                 {"tensors", tensors},
                                 {"payload_bytes", offset}};
  const std::string text = header.dump();

  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out += text;
  out.reserve(out.size() + offset);
  for (const auto& v : params.values)
    for (float x : v.storage()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) bad("bad magic (not a SHAN file)");
  if (bytes.size() < kPreamble)
    bad("truncated preamble: expected " + std::to_string(kPreamble) + " bytes, got " + std::to_string(bytes.size()));
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kCheckpointVersion)
    bad("unsupported version " + std::to_string(version) + " (expected " + std::to_string(kCheckpointVersion) + ")");
  const auto header_len = get_le<std::uint64_t>(bytes, 8);
  if (header_len > bytes.size() - kPreamble)
    bad("truncated header: expected " + std::to_string(header_len) + " bytes, got " +
        std::to_string(bytes.size() - kPreamble));

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(kPreamble, header_len));
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("header is not valid JSON: ") + e.what());
  }

  Checkpoint c;
  try {
    c.model = create_model(model_config_from_json(header.at("model_config")),
                           header.at("vocabulary").size());
    c.train = train_config_from_json(header.at("train_config"));
    c.vocab = Vocabulary::from_words(header.at("vocabulary").get<std::vector<std::string>>());
    c.authors = header.at("authors").get<std::vector<std::string>>();
    if (header.at("tag_set").get<std::vector<std::string>>() != TagSet::standard().names())
      bad("tag set differs from the built-in one");
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("malformed header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    bad(std::string("inconsistent header: ") + e.what());
  }
  if (c.authors.size() != c.model.config.num_classes)
    bad(std::to_string(c.authors.size()) + " authors for " + std::to_string(c.model.config.num_classes) + " classes");

  ParamSet& params = c.model.params;
  const nlohmann::json& tensors = header.at("tensors");
  if (!tensors.is_array() || tensors.size() != params.size())
    bad("manifest lists " + std::to_string(tensors.size()) + " tensors, model has " + std::to_string(params.size()));
  std::uint64_t expected_offset = 0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const auto& t = tensors[p];
    try {
      if (t.at("name").get<std::string>() != params.specs[p].name)
        bad("tensor " + std::to_string(p) + " is '" + t.at("name").get<std::string>() + "', expected '" +
            params.specs[p].name + "'");
      if (t.at("shape").get<Shape>() != params.specs[p].shape)
        bad("tensor '" + params.specs[p].name + "' has shape " + shape_to_string(t.at("shape").get<Shape>()) +
            ", expected " + shape_to_string(params.specs[p].shape));
      if (t.at("offset").get<std::uint64_t>() != expected_offset)
        bad("tensor '" + params.specs[p].name + "' offset " + std::to_string(t.at("offset").get<std::uint64_t>()) +
            " is not contiguous (expected " + std::to_string(expected_offset) + ")");
    } catch (const nlohmann::json::exception& e) {
      bad(std::string("malformed manifest: ") + e.what());
    }
    expected_offset += 4 * params.values[p].size();
  }

  const std::size_t payload_at = kPreamble + header_len;
  const std::size_t actual = bytes.size() - payload_at;
  if (actual != expected_offset)
    bad(std::string(actual < expected_offset ? "truncated" : "oversized") + " payload: expected " +
        std::to_string(expected_offset) + " bytes, got " + std::to_string(actual));
  std::size_t at = payload_at;
  for (auto& v : params.values)
    for (float& x : v.storage()) {
      x = std::bit_cast<float>(get_le<std::uint32_t>(bytes, at));
      at += 4;
    }
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return parse_checkpoint(s.str());
}

}  // namespace stylehan
