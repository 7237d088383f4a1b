#include "stylehan/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <random>
#include <stdexcept>
#include <vector>

namespace stylehan {

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool is_integer(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void fill_fallback(Tensor& table, const std::vector<bool>& found, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, kFallbackStddev);
  const std::size_t d = table.dim(1);
  for (std::size_t row = 1; row < table.dim(0); ++row) {
    if (found[row]) continue;
    for (std::size_t c = 0; c < d; ++c) table.at(row, c) = normal(rng);
  }
}

}  // namespace

LexicalEmbeddingTable load_pretrained(const std::string& path, const Vocabulary& vocab, std::size_t d_w,
                                      std::uint64_t seed) {
  if (d_w < 1) throw std::invalid_argument("embedding dimension must be positive");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read pretrained vectors '" + path + "'");

  LexicalEmbeddingTable out{Tensor({vocab.size(), d_w}), true, 0};
  std::vector<bool> found(vocab.size(), false);
  std::vector<double> sum(d_w, 0.0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) {
      std::cerr << "warning: " << path << ": skipping header line '" << line << "'\n";
      continue;
    }
    if (fields.size() - 1 != d_w)
      throw FormatError(path + ": line " + std::to_string(line_no) + ": expected " + std::to_string(d_w) +
                        " values, found " + std::to_string(fields.size() - 1));
    std::vector<float> vec(d_w);
    for (std::size_t c = 0; c < d_w; ++c) {
      auto f = fields[c + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), vec[c]);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw FormatError(path + ": line " + std::to_string(line_no) + ": bad number '" + std::string(f) + "'");
    }
    const std::size_t id = vocab.id(fields[0]);
    // Exact matches only; the first occurrence of a word wins.
    if (id <= kUnkId || found[id] || vocab.word(id) != fields[0]) continue;
    found[id] = true;
    ++out.found;
    for (std::size_t c = 0; c < d_w; ++c) {
      out.table.at(id, c) = vec[c];
      sum[c] += vec[c];
    }
  }

  fill_fallback(out.table, found, seed);
  if (out.found > 0) {
    for (std::size_t c = 0; c < d_w; ++c) out.table.at(kUnkId, c) = static_cast<float>(sum[c] / out.found);
  }
  for (std::size_t c = 0; c < d_w; ++c) out.table.at(kPadId, c) = 0.0f;
  return out;
}

LexicalEmbeddingTable random_lexical(const Vocabulary& vocab, std::size_t d_w, std::uint64_t seed) {
  if (d_w < 1) throw std::invalid_argument("embedding dimension must be positive");
  LexicalEmbeddingTable out{Tensor({vocab.size(), d_w}), true, 0};
  fill_fallback(out.table, std::vector<bool>(vocab.size(), false), seed);
  return out;
}

SyntacticEmbeddingTable init_syntactic(std::uint64_t seed, std::size_t d_p) {
  if (d_p < 1) throw std::invalid_argument("syntactic embedding dimension must be positive");
  SyntacticEmbeddingTable out{Tensor({TagSet::kIdCount, d_p})};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uniform(-kSyntacticInitRange, kSyntacticInitRange);
  for (std::size_t row = 1; row < TagSet::kIdCount; ++row)
    for (std::size_t c = 0; c < d_p; ++c) out.table.at(row, c) = uniform(rng);
  return out;
}

}  // namespace stylehan
