#include "stylehan/pipeline.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace stylehan {

std::vector<std::string> author_list(const std::vector<std::string>& authors) {
  std::set<std::string> unique(authors.begin(), authors.end());
  return {unique.begin(), unique.end()};
}

std::size_t author_label(const std::vector<std::string>& authors, const std::string& author) {
  auto it = std::lower_bound(authors.begin(), authors.end(), author);
  if (it == authors.end() || *it != author) throw std::invalid_argument("unknown author '" + author + "'");
  return static_cast<std::size_t>(it - authors.begin());
}

TaggedDocument tag_text(const PerceptronTagger& tagger, const std::string& text) {
  TaggedDocument doc;
  for (const auto& sentence : split_sentences(text)) {
    auto tokens = tokenize(sentence);
    if (!tokens.empty()) doc.push_back(tagger.tag(tokens));
  }
  return doc;
}

LabeledCorpus label_corpus(const std::vector<RawDocument>& raw, std::vector<TaggedDocument> tagged) {
  if (raw.size() != tagged.size())
    throw std::invalid_argument("label_corpus: " + std::to_string(raw.size()) + " raw documents but " +
                                std::to_string(tagged.size()) + " tagged ones");
  LabeledCorpus out;
  std::vector<std::string> names;
  for (const auto& r : raw) names.push_back(r.author);
  out.authors = author_list(names);
  for (const auto& n : names) out.labels.push_back(author_label(out.authors, n));
  out.docs = std::move(tagged);
  return out;
}

Vocabulary vocab_from_documents(const std::vector<TaggedDocument>& docs, std::size_t vocab_limit) {
  std::vector<std::vector<std::string>> streams;
  for (const auto& doc : docs)
    for (const auto& s : doc) streams.push_back(s.tokens);
  return build_vocab(streams, vocab_limit);
}

std::vector<TensorizedDocument> tensorize_all(const std::vector<TaggedDocument>& docs,
                                              const std::vector<std::size_t>& labels, const Vocabulary& vocab,
                                              GridShape grid) {
  if (docs.size() != labels.size()) throw std::invalid_argument("tensorize_all: documents and labels differ in count");
  std::vector<TensorizedDocument> out(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) out[i] = tensorize(docs[i], vocab, grid, labels[i]);
  return out;
}

}  // namespace stylehan
