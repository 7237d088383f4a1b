#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stylehan/model.hpp"
#include "stylehan/textpipe.hpp"
#include "stylehan/trainer.hpp"

namespace stylehan {

// Binary layout:
//   "SHAN"                 4 bytes
//   version                u32 little-endian
//   header length          u64 little-endian
//   header                 JSON: model_config, train_config, vocabulary,
//                          tag_set, authors, tensors [{name, shape, offset}],
//                          payload_bytes
//   payload                float32 little-endian, tensors in parameter
//                          enumeration order, offsets contiguous from 0
struct Checkpoint {
  ModelParams model;
  TrainConfig train;
  Vocabulary vocab;
  std::vector<std::string> authors;  // label order
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& checkpoint);
// Throws FormatError on a bad magic, version, header or manifest, and on a
// truncated or oversized payload (naming expected and actual byte counts).
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace stylehan
