#pragma once

#include <cstdint>
#include <string>

#include "stylehan/tensor.hpp"
#include "stylehan/textpipe.hpp"

namespace stylehan {

struct LexicalEmbeddingTable {
  Tensor table;  // |vocab| × d_w; row 0 is PAD
  bool trainable = true;
  std::size_t found = 0;  // vocabulary rows filled from the vector file
};

struct SyntacticEmbeddingTable {
  Tensor table;  // 48 × d_p; row 0 is PAD
};

inline constexpr float kFallbackStddev = 0.1f;
inline constexpr float kSyntacticInitRange = 0.05f;

// Reads the plain-text pretrained-vector format (`word v1 … v_d` per line).
// Words missing from the file are drawn from N(0, 0.1²) with `seed`; UNK is the
// mean of the vectors found; PAD is zero. A first line of two integers is
// treated as a header and skipped with a warning.
LexicalEmbeddingTable load_pretrained(const std::string& path, const Vocabulary& vocab, std::size_t d_w,
                                      std::uint64_t seed);

// Table with every non-PAD row drawn from the fallback distribution.
LexicalEmbeddingTable random_lexical(const Vocabulary& vocab, std::size_t d_w, std::uint64_t seed);

// Uniform in [−0.05, 0.05], seeded; PAD row zero.
SyntacticEmbeddingTable init_syntactic(std::uint64_t seed, std::size_t d_p);

}  // namespace stylehan
