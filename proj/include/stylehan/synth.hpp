#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "stylehan/corpus_io.hpp"
#include "stylehan/textpipe.hpp"

namespace stylehan {

enum class Signal { lexical_only, syntax_only, dual };
std::string to_string(Signal signal);
Signal parse_signal(const std::string& text);  // lexical-only, syntax-only, dual

struct SyntaxTemplate {
  std::vector<std::size_t> tags;  // tag ids; the last one ends the sentence
  double weight = 1.0;
  bool operator==(const SyntaxTemplate&) const = default;
};

struct TagLexicon {
  std::vector<std::string> words;
  std::vector<double> weights;  // per-author preference, same length as words
  bool operator==(const TagLexicon&) const = default;
};

struct AuthorProfile {
  std::string id;
  std::vector<SyntaxTemplate> templates;
  std::map<std::size_t, TagLexicon> lexicons;  // by tag id
  // Sentence length range; every template length lies inside it.
  std::size_t min_tokens = 6, max_tokens = 12;
  std::size_t min_sentences = 8, max_sentences = 16;  // per document, uniform
};

struct SynthSpec {
  std::vector<AuthorProfile> profiles;
  std::size_t docs_per_author = 50;
  std::uint64_t seed = 1;
  Signal signal = Signal::dual;

  // Checks weights, lexicon coverage and the signal constraint: syntax-only
  // needs identical lexicons across authors, lexical-only identical templates.
  void validate() const;
};

// Knobs for building a spec. Authors share a pool of base templates and
// per-tag word lists. The syntactic signal gives each author its own
// reordering of every base template, used with probability syntax_strength
// (so tag frequencies stay identical across authors and only order differs).
// The lexical signal boosts a random third of each tag's words per author by
// a factor of 1 + lexical_strength.
struct SynthOptions {
  std::size_t authors = 4;
  std::size_t docs_per_author = 50;
  std::size_t min_sentences = 8, max_sentences = 16;
  std::size_t min_tokens = 6, max_tokens = 12;
  std::size_t base_templates = 30;
  std::size_t words_per_tag = 24;
  double syntax_strength = 0.6;
  double lexical_strength = 1.0;
  std::uint64_t seed = 1;
  Signal signal = Signal::dual;
};

SynthSpec make_spec(const SynthOptions& options);

struct SynthCorpus {
  std::vector<RawDocument> raw;         // {"author", "text"}
  std::vector<TaggedDocument> tagged;   // ground-truth tags, same order
};

// Deterministic in spec.seed; each document draws from its own derived seed.
SynthCorpus generate_corpus(const SynthSpec& spec);

// Writes <prefix>.jsonl and <prefix>.tagged.txt.
void write_corpus(const SynthCorpus& corpus, const std::string& prefix);

}  // namespace stylehan
