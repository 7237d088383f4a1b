#include "stylehan/textpipe.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

#include "stylehan/tensor.hpp"

namespace stylehan {

namespace {

const std::vector<std::string> kTagNames = {
    "CC",  "CD",  "DT",  "EX",   "FW",  "IN",  "JJ",  "JJR", "JJS", "LS",  "MD",  "NN",
    "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP",  "SYM",
    "TO",  "UH",  "VB",  "VBD", "VBG",  "VBN", "VBP", "VBZ", "WDT", "WP",  "WP$", "WRB",
    ",",   ":",   "...", "?",   "!",    ".",   "$",   "(",   ")",   "``",  "''"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_punct_char(char c) {
  switch (c) {
    case ',': case ':': case ';': case '?': case '!': case '.': case '$': case '(': case ')':
      return true;
    default:
      return false;
  }
}

}  // namespace

TagSet::TagSet() {
  names_.reserve(kIdCount);
  names_.push_back("<pad>");
  names_.insert(names_.end(), kTagNames.begin(), kTagNames.end());
  for (std::size_t i = 0; i < names_.size(); ++i) ids_.emplace(names_[i], i);
}

const TagSet& TagSet::standard() {
  static const TagSet tags;
  return tags;
}

const std::string& TagSet::name(std::size_t id) const {
  if (id >= names_.size()) throw IndexError("tag id " + std::to_string(id) + " out of range");
  return names_[id];
}

std::optional<std::size_t> TagSet::find(std::string_view tag) const {
  auto it = ids_.find(std::string(tag));
  if (it == ids_.end() || it->second == kPadId) return std::nullopt;
  return it->second;
}

std::size_t TagSet::id(std::string_view tag) const {
  if (auto found = find(tag)) return *found;
  throw std::invalid_argument("unknown POS tag '" + std::string(tag) + "'");
}

std::optional<std::size_t> TagSet::punctuation_tag(std::string_view token) const {
  if (token == ";") return id(":");
  auto found = find(token);
  if (found && *found >= id(",")) return found;
  return std::nullopt;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::string piece = trim(text.substr(start, end - start));
    if (!piece.empty()) out.push_back(std::move(piece));
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t end = i + 1;
    if (c == '.' && text.substr(i, 3) == "...") end = i + 3;
    if (end == text.size() || is_space(text[end])) {
      flush(end);
      i = end - 1;
    } else if (end == i + 3) {
      i = end - 1;
    }
  }
  flush(text.size());
  return out;
}

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && is_space(sentence[i])) ++i;
    std::size_t j = i;
    while (j < sentence.size() && !is_space(sentence[j])) ++j;
    std::string_view word = sentence.substr(i, j - i);
    std::string current;
    for (std::size_t k = 0; k < word.size();) {
      std::size_t len = 0;
      if (word.substr(k, 3) == "...") {
        len = 3;
      } else if (word.substr(k, 2) == "``" || word.substr(k, 2) == "''") {
        len = 2;
      } else if (is_punct_char(word[k])) {
        len = 1;
      }
      if (len == 0) {
        current.push_back(word[k++]);
        continue;
      }
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      tokens.emplace_back(word.substr(k, len));
      k += len;
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    i = j;
  }
  return tokens;
}

Vocabulary::Vocabulary() : Vocabulary({kPadToken, kUnkToken}, 0) {}

Vocabulary::Vocabulary(std::vector<std::string> words, int) : words_(std::move(words)) {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (!ids_.emplace(words_[i], i).second) throw FormatError("vocabulary word '" + words_[i] + "' is repeated");
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
  if (words.size() < 2 || words[0] != kPadToken || words[1] != kUnkToken)
    throw FormatError("vocabulary must start with the PAD and UNK markers");
  Vocabulary v(std::move(words), 0);
  return v;
}

std::size_t Vocabulary::id(std::string_view word) const {
  auto it = ids_.find(to_lower(word));
  return it == ids_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view word) const { return ids_.count(to_lower(word)) != 0; }

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& token_streams, std::size_t vocab_limit) {
  if (vocab_limit < 1) throw std::invalid_argument("vocab_limit must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& stream : token_streams)
    for (const auto& tok : stream) ++counts[to_lower(tok)];
  counts.erase(Vocabulary::kPadToken);
  counts.erase(Vocabulary::kUnkToken);
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > vocab_limit) ranked.resize(vocab_limit);
  std::vector<std::string> words = {Vocabulary::kPadToken, Vocabulary::kUnkToken};
  for (auto& [w, n] : ranked) words.push_back(w);
  return Vocabulary::from_words(std::move(words));
}

std::size_t TensorizedDocument::real_sentences() const {
  return static_cast<std::size_t>(std::count(sentence_mask.begin(), sentence_mask.end(), std::uint8_t{1}));
}

std::vector<std::size_t> TensorizedDocument::sentence_words(std::size_t s) const {
  auto first = word_ids.begin() + static_cast<std::ptrdiff_t>(s * grid.words_per_sentence);
  return {first, first + static_cast<std::ptrdiff_t>(grid.words_per_sentence)};
}

std::vector<std::size_t> TensorizedDocument::sentence_tags(std::size_t s) const {
  auto first = tag_ids.begin() + static_cast<std::ptrdiff_t>(s * grid.words_per_sentence);
  return {first, first + static_cast<std::ptrdiff_t>(grid.words_per_sentence)};
}

TensorizedDocument tensorize(const TaggedDocument& doc, const Vocabulary& vocab, GridShape grid, std::size_t label) {
  if (grid.sentences_per_doc < 1 || grid.words_per_sentence < 1)
    throw std::invalid_argument("tensorize: grid dimensions must be positive");
  TensorizedDocument out;
  out.grid = grid;
  out.label = label;
  out.word_ids.assign(grid.sentences_per_doc * grid.words_per_sentence, kPadId);
  out.tag_ids.assign(out.word_ids.size(), kPadId);
  out.sentence_mask.assign(grid.sentences_per_doc, 0);
  std::size_t row = 0;
  for (const auto& sentence : doc) {
    if (row == grid.sentences_per_doc) break;
    if (sentence.tokens.size() != sentence.tags.size())
      throw std::invalid_argument("tensorize: sentence has mismatched token and tag counts");
    if (sentence.tokens.empty()) continue;
    const std::size_t n = std::min(sentence.tokens.size(), grid.words_per_sentence);
    for (std::size_t w = 0; w < n; ++w) {
      out.word_ids[row * grid.words_per_sentence + w] = vocab.id(sentence.tokens[w]);
      out.tag_ids[row * grid.words_per_sentence + w] = sentence.tags[w];
    }
    out.sentence_mask[row] = 1;
    ++row;
  }
  if (row == 0) throw std::invalid_argument("tensorize: document has no sentences");
  return out;
}

}  // namespace stylehan
