#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stylehan {

inline constexpr std::size_t kPadId = 0;
inline constexpr std::size_t kUnkId = 1;

/// The fixed POS inventory: 47 tags at ids 1..47, PAD at id 0.
/// Ids are stable across runs and builds.
class TagSet {
 public:
  static const TagSet& standard();

  static constexpr std::size_t kTagCount = 47;
  static constexpr std::size_t kIdCount = kTagCount + 1;

  std::size_t size() const { return names_.size(); }  // including PAD
  const std::string& name(std::size_t id) const;
  std::optional<std::size_t> find(std::string_view tag) const;
  std::size_t id(std::string_view tag) const;  // throws on unknown tags
  const std::vector<std::string>& names() const { return names_; }

  // Tag forced for a punctuation token, if any. Tokens spelled exactly like a
  // punctuation tag map to that tag; ';' maps to ':'.
  std::optional<std::size_t> punctuation_tag(std::string_view token) const;

 private:
  TagSet();
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> ids_;
};

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<std::size_t> tags;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const TaggedSentence&) const = default;
};

using TaggedDocument = std::vector<TaggedSentence>;

std::string to_lower(std::string_view text);

// Splits after '.', '!', '?' or "..." when followed by whitespace or end of
// text. No abbreviation handling: "Mr. X" yields two sentences.
std::vector<std::string> split_sentences(std::string_view text);

// Whitespace split, then inventory punctuation split into standalone tokens.
std::vector<std::string> tokenize(std::string_view sentence);

class Vocabulary {
 public:
  Vocabulary();
  // Rebuilds from words in id order; ids 0 and 1 must be the PAD/UNK markers.
  static Vocabulary from_words(std::vector<std::string> words);

  std::size_t size() const { return words_.size(); }
  // Lowercases `word` and returns its id, or UNK.
  std::size_t id(std::string_view word) const;
  bool contains(std::string_view word) const;
  const std::string& word(std::size_t id) const { return words_.at(id); }
  const std::vector<std::string>& words() const { return words_; }

  static constexpr const char* kPadToken = "<pad>";
  static constexpr const char* kUnkToken = "<unk>";

 private:
  Vocabulary(std::vector<std::string> words, int);
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> ids_;
};

// Keeps the `vocab_limit` most frequent lowercased words; frequency ties are
// broken lexicographically.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& token_streams, std::size_t vocab_limit);

struct GridShape {
  std::size_t sentences_per_doc = 0;
  std::size_t words_per_sentence = 0;
  bool operator==(const GridShape&) const = default;
};

struct TensorizedDocument {
  GridShape grid;
  std::vector<std::size_t> word_ids;  // row-major sentences × words
  std::vector<std::size_t> tag_ids;
  std::vector<std::uint8_t> sentence_mask;
  std::size_t label = 0;

  std::size_t real_sentences() const;
  std::vector<std::size_t> sentence_words(std::size_t s) const;
  std::vector<std::size_t> sentence_tags(std::size_t s) const;
  bool operator==(const TensorizedDocument&) const = default;
};

// Keeps the first sentences_per_doc non-empty sentences, each truncated or
// PAD-filled to words_per_sentence. Throws when the document has no tokens.
TensorizedDocument tensorize(const TaggedDocument& doc, const Vocabulary& vocab, GridShape grid, std::size_t label);

}  // namespace stylehan
