#pragma once

#include <string>
#include <vector>

#include "stylehan/corpus_io.hpp"
#include "stylehan/model.hpp"
#include "stylehan/tagger.hpp"
#include "stylehan/textpipe.hpp"

namespace stylehan {

// Authors in sorted order; the label of an author is its index.
std::vector<std::string> author_list(const std::vector<std::string>& authors);
std::size_t author_label(const std::vector<std::string>& authors, const std::string& author);

// Split into sentences, tokenize and tag raw text.
TaggedDocument tag_text(const PerceptronTagger& tagger, const std::string& text);

// Tagged documents with author labels.
struct LabeledCorpus {
  std::vector<std::string> authors;  // sorted; label = index
  std::vector<TaggedDocument> docs;
  std::vector<std::size_t> labels;
};

// Pairs `tagged` with the authors of `raw` (same order).
LabeledCorpus label_corpus(const std::vector<RawDocument>& raw, std::vector<TaggedDocument> tagged);

Vocabulary vocab_from_documents(const std::vector<TaggedDocument>& docs, std::size_t vocab_limit);

std::vector<TensorizedDocument> tensorize_all(const std::vector<TaggedDocument>& docs,
                                              const std::vector<std::size_t>& labels, const Vocabulary& vocab,
                                              GridShape grid);

}  // namespace stylehan
