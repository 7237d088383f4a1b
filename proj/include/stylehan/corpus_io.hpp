#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "stylehan/textpipe.hpp"

namespace stylehan {

// Pre-tagged text: one sentence per line, `token_TAG` items separated by
// single spaces, literal underscores in tokens written as `\_`. In document
// files a blank line ends a document.
TaggedSentence parse_tagged_line(std::string_view line);
std::string format_tagged_sentence(const TaggedSentence& sentence);

std::vector<TaggedSentence> read_tagged_sentences(const std::string& path);
std::vector<TaggedDocument> read_tagged_documents(const std::string& path);
void write_tagged_documents(std::ostream& out, const std::vector<TaggedDocument>& docs);

struct RawDocument {
  std::string author;
  std::string text;
};

// JSON-lines file of {"author", "text"} objects, or a directory holding one
// subdirectory per author with .txt files (sorted by path).
std::vector<RawDocument> read_dataset(const std::string& path);
void write_dataset_jsonl(std::ostream& out, const std::vector<RawDocument>& docs);

}  // namespace stylehan
