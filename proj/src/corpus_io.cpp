#include "stylehan/corpus_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "stylehan/tensor.hpp"

namespace stylehan {

namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return in;
}

std::string escape_token(std::string_view token) {
  std::string out;
  for (char c : token) {
    if (c == '_') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

TaggedSentence parse_tagged_line(std::string_view line) {
  const TagSet& tags = TagSet::standard();
  TaggedSentence out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\r' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\r' && line[j] != '\t') ++j;
    std::string_view item = line.substr(i, j - i);
    // The separator is the last underscore not preceded by a backslash.
    std::size_t sep = std::string_view::npos;
    for (std::size_t k = item.size(); k-- > 0;) {
      if (item[k] == '_' && (k == 0 || item[k - 1] != '\\')) {
        sep = k;
        break;
      }
    }
    if (sep == std::string_view::npos || sep == 0 || sep + 1 == item.size())
      throw FormatError("malformed tagged token '" + std::string(item) + "'");
    std::string token;
    for (std::size_t k = 0; k < sep; ++k) {
      if (item[k] == '\\' && k + 1 < sep && item[k + 1] == '_') continue;
      token += item[k];
    }
    out.tags.push_back(tags.id(item.substr(sep + 1)));
    out.tokens.push_back(std::move(token));
    i = j;
  }
  return out;
}

std::string format_tagged_sentence(const TaggedSentence& sentence) {
  const TagSet& tags = TagSet::standard();
  std::string out;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (i) out += ' ';
    out += escape_token(sentence.tokens[i]);
    out += '_';
    out += tags.name(sentence.tags[i]);
  }
  return out;
}

std::vector<TaggedSentence> read_tagged_sentences(const std::string& path) {
  std::vector<TaggedSentence> out;
  for (auto& doc : read_tagged_documents(path))
    for (auto& s : doc) out.push_back(std::move(s));
  return out;
}

std::vector<TaggedDocument> read_tagged_documents(const std::string& path) {
  auto in = open_input(path);
  std::vector<TaggedDocument> docs;
  TaggedDocument current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      if (!current.empty()) docs.push_back(std::move(current));
      current.clear();
      continue;
    }
    try {
      current.push_back(parse_tagged_line(line));
    } catch (const std::exception& e) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!current.empty()) docs.push_back(std::move(current));
  return docs;
}

void write_tagged_documents(std::ostream& out, const std::vector<TaggedDocument>& docs) {
  for (const auto& doc : docs) {
    for (const auto& s : doc) out << format_tagged_sentence(s) << '\n';
    out << '\n';
  }
}

std::vector<RawDocument> read_dataset(const std::string& path) {
  std::vector<RawDocument> docs;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      if (file.parent_path() == fs::path(path)) continue;
      std::ifstream in(file);
      std::stringstream buf;
      buf << in.rdbuf();
      docs.push_back({fs::relative(file.parent_path(), path).begin()->string(), buf.str()});
    }
    return docs;
  }
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto obj = nlohmann::json::parse(line);
      docs.push_back({obj.at("author").get<std::string>(), obj.at("text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

void write_dataset_jsonl(std::ostream& out, const std::vector<RawDocument>& docs) {
  for (const auto& d : docs) {
    nlohmann::ordered_json obj;
    obj["author"] = d.author;
    obj["text"] = d.text;
    out << obj.dump() << '\n';
  }
}

}  // namespace stylehan
