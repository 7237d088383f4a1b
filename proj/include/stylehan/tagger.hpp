#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "stylehan/textpipe.hpp"

namespace stylehan {

/// Greedy left-to-right averaged-perceptron POS tagger over the 47-tag
/// inventory. Punctuation tokens spelled like a punctuation tag bypass the
/// model and receive that tag.
class PerceptronTagger {
 public:
  static constexpr std::size_t kClasses = TagSet::kTagCount;
  using Weights = std::array<float, kClasses>;

  PerceptronTagger() = default;

  // Averaged-perceptron training; the sentence order of every epoch is a
  // seeded shuffle, so identical inputs give bit-identical weights.
  static PerceptronTagger train(const std::vector<TaggedSentence>& corpus, int epochs, std::uint64_t seed);

  TaggedSentence tag(const std::vector<std::string>& tokens) const;

  std::size_t feature_count() const { return weights_.size(); }

  // Text serialization: one feature per line, sorted, weights as hex floats.
  void save(std::ostream& out) const;
  static PerceptronTagger load(std::istream& in);
  void save(const std::string& path) const;
  static PerceptronTagger load(const std::string& path);

  bool operator==(const PerceptronTagger& other) const { return weights_ == other.weights_; }

 private:
  std::size_t predict(const std::vector<std::string>& features) const;

  std::unordered_map<std::string, Weights> weights_;
};

// Feature strings for position `i`, given the tags already predicted to its left.
std::vector<std::string> tagger_features(const std::vector<std::string>& tokens, std::size_t i,
                                         const std::vector<std::size_t>& left_tags);

// Fraction of tokens whose predicted tag matches the reference.
double token_accuracy(const PerceptronTagger& tagger, const std::vector<TaggedSentence>& reference);

// The tagged corpus shipped in data/ (override the directory with the
// STYLEHAN_DATA_DIR environment variable).
std::string bundled_corpus_path();

inline constexpr int kDefaultTaggerEpochs = 5;
inline constexpr std::uint64_t kDefaultTaggerSeed = 1;

// Tagger trained on the whole bundled corpus with the default settings.
PerceptronTagger default_tagger();

}  // namespace stylehan
