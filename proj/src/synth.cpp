#include "stylehan/synth.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

namespace stylehan {

std::string to_string(Signal signal) {
  switch (signal) {
    case Signal::lexical_only: return "lexical-only";
    case Signal::syntax_only: return "syntax-only";
    case Signal::dual: return "dual";
  }
  return "?";
}

Signal parse_signal(const std::string& text) {
  if (text == "lexical-only") return Signal::lexical_only;
  if (text == "syntax-only") return Signal::syntax_only;
  if (text == "dual") return Signal::dual;
  throw std::invalid_argument("unknown signal '" + text + "' (expected lexical-only, syntax-only or dual)");
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("synth spec: " + m); };
  if (profiles.size() < 2) fail("need at least two authors");
  if (docs_per_author < 1) fail("docs_per_author must be at least 1");
  const TagSet& tags = TagSet::standard();
  for (const auto& a : profiles) {
    if (a.templates.empty()) fail("author '" + a.id + "' has no templates");
    if (a.min_sentences < 1 || a.min_sentences > a.max_sentences) fail("author '" + a.id + "' has a bad sentence range");
    if (a.min_tokens < 1 || a.min_tokens > a.max_tokens) fail("author '" + a.id + "' has a bad length range");
    for (const auto& t : a.templates) {
      if (!(t.weight > 0.0)) fail("template weights must be positive");
      if (t.tags.size() < a.min_tokens || t.tags.size() > a.max_tokens)
        fail("author '" + a.id + "' has a template outside its length range");
      for (std::size_t tag : t.tags) {
        if (tag == kPadId || tag >= tags.size()) fail("template tag id " + std::to_string(tag) + " is not in the tag set");
        auto it = a.lexicons.find(tag);
        if (it == a.lexicons.end() || it->second.words.empty())
          fail("author '" + a.id + "' has no words for tag " + tags.name(tag));
      }
    }
    for (const auto& [tag, lex] : a.lexicons) {
      if (lex.weights.size() != lex.words.size()) fail("lexicon weights and words differ in length");
      for (double w : lex.weights)
        if (!(w > 0.0)) fail("lexicon weights must be positive");
    }
  }
  for (std::size_t i = 1; i < profiles.size(); ++i) {
    if (signal == Signal::syntax_only && profiles[i].lexicons != profiles[0].lexicons)
      fail("syntax-only corpora need identical lexicons for every author");
    if (signal == Signal::lexical_only && profiles[i].templates != profiles[0].templates)
      fail("lexical-only corpora need identical templates for every author");
  }
}

namespace {

using Rng = std::mt19937_64;

std::uint64_t draw_index(Rng& rng, const std::vector<double>& weights) {
  std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
  return d(rng);
}

// Tag-level chain for plausible-looking base templates.
const std::map<std::string, std::vector<std::string>>& transitions() {
  static const std::map<std::string, std::vector<std::string>> t = {
      {"<s>", {"DT", "DT", "PRP", "PRP$", "NNP", "RB", "IN"}},
      {"DT", {"JJ", "NN", "NN", "NNS"}},
      {"PRP$", {"NN", "NNS", "JJ"}},
      {"JJ", {"NN", "NNS", "JJ"}},
      {"NN", {"VBD", "VBZ", "IN", "MD", ",", "CC", "WDT"}},
      {"NNS", {"VBD", "VBP", "IN", "MD", "CC"}},
      {"NNP", {"VBD", "VBZ", "NNP", ","}},
      {"PRP", {"VBD", "VBZ", "MD", "RB"}},
      {"MD", {"VB", "RB"}},
      {"RB", {"VBD", "VB", "JJ", ","}},
      {"VB", {"DT", "PRP$", "IN", "RB", "TO"}},
      {"VBD", {"DT", "PRP$", "IN", "RB", "TO", "VBN"}},
      {"VBZ", {"DT", "PRP$", "IN", "RB", "VBG"}},
      {"VBP", {"DT", "PRP$", "IN", "RB"}},
      {"VBN", {"IN", "RB", "DT"}},
      {"VBG", {"DT", "NNS", "IN"}},
      {"IN", {"DT", "PRP$", "NNP", "CD"}},
      {"CD", {"NNS", "JJ"}},
      {"TO", {"VB"}},
      {"CC", {"DT", "PRP", "NNP"}},
      {"WDT", {"VBD", "VBZ"}},
      {",", {"CC", "DT", "PRP", "RB"}},
      {":", {"DT", "NNS"}},
  };
  return t;
}

std::vector<std::size_t> base_template(Rng& rng, std::size_t length) {
  const TagSet& tags = TagSet::standard();
  std::vector<std::size_t> out;
  std::string state = "<s>";
  while (out.size() + 1 < length) {
    const auto& next = transitions().at(state);
    state = next[rng() % next.size()];
    out.push_back(tags.id(state));
  }
  const double end = std::uniform_real_distribution<double>(0, 1)(rng);
  out.push_back(tags.id(end < 0.8 ? "." : end < 0.9 ? "?" : "!"));
  return out;
}

std::string pseudo_word(Rng& rng) {
  static const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr"};
  static const char* vowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  const std::size_t syllables = 2 + rng() % 2;
  std::string w;
  for (std::size_t s = 0; s < syllables; ++s) {
    w += onsets[rng() % std::size(onsets)];
    w += vowels[rng() % std::size(vowels)];
  }
  if (rng() % 2) w += "n";
  return w;
}

}  // namespace

SynthSpec make_spec(const SynthOptions& o) {
  if (o.authors < 2) throw std::invalid_argument("synth: need at least two authors");
  if (o.min_tokens < 2 || o.min_tokens > o.max_tokens) throw std::invalid_argument("synth: bad sentence length range");
  if (o.base_templates < 1 || o.words_per_tag < 1) throw std::invalid_argument("synth: empty template or word pool");
  if (o.syntax_strength < 0.0 || o.syntax_strength > 1.0)
    throw std::invalid_argument("synth: syntax_strength must lie in [0, 1]");
  if (o.lexical_strength < 0.0) throw std::invalid_argument("synth: lexical_strength must be non-negative");

  const TagSet& tags = TagSet::standard();
  Rng rng(o.seed);

  std::vector<SyntaxTemplate> base;
  std::set<std::size_t> used_tags;
  for (std::size_t t = 0; t < o.base_templates; ++t) {
    const std::size_t len = o.min_tokens + rng() % (o.max_tokens - o.min_tokens + 1);
    SyntaxTemplate tpl{base_template(rng, len), 0.5 + std::uniform_real_distribution<double>(0, 1)(rng)};
    used_tags.insert(tpl.tags.begin(), tpl.tags.end());
    base.push_back(std::move(tpl));
  }

  std::map<std::size_t, TagLexicon> shared;
  std::set<std::string> taken;
  for (std::size_t tag : used_tags) {
    TagLexicon lex;
    if (tags.punctuation_tag(tags.name(tag))) {
      lex.words = {tags.name(tag)};
    } else {
      while (lex.words.size() < o.words_per_tag) {
        std::string w = pseudo_word(rng);
        if (taken.insert(w).second) lex.words.push_back(w);
      }
    }
    lex.weights.assign(lex.words.size(), 1.0);
    shared.emplace(tag, std::move(lex));
  }

  const bool syntax = o.signal != Signal::lexical_only && o.syntax_strength > 0.0;
  const bool lexical = o.signal != Signal::syntax_only && o.lexical_strength > 0.0;

  SynthSpec spec;
  spec.docs_per_author = o.docs_per_author;
  spec.seed = o.seed;
  spec.signal = o.signal;
  for (std::size_t a = 0; a < o.authors; ++a) {
    AuthorProfile p;
    p.id = "author" + std::to_string(a);
    p.min_tokens = o.min_tokens;
    p.max_tokens = o.max_tokens;
    p.min_sentences = o.min_sentences;
    p.max_sentences = o.max_sentences;
    for (const auto& tpl : base) {
      if (!syntax) {
        p.templates.push_back(tpl);
        continue;
      }
      // Same tags, author-specific order; the sentence terminator stays last.
      SyntaxTemplate own = tpl;
      std::shuffle(own.tags.begin(), own.tags.end() - 1, rng);
      own.weight = tpl.weight * o.syntax_strength;
      p.templates.push_back(own);
      if (o.syntax_strength < 1.0) p.templates.push_back({tpl.tags, tpl.weight * (1.0 - o.syntax_strength)});
    }
    p.lexicons = shared;
    if (lexical) {
      for (auto& [tag, lex] : p.lexicons) {
        if (lex.words.size() < 2) continue;
        for (double& w : lex.weights)
          if (rng() % 3 == 0) w += o.lexical_strength;
      }
    }
    spec.profiles.push_back(std::move(p));
  }
  spec.validate();
  return spec;
}

SynthCorpus generate_corpus(const SynthSpec& spec) {
  spec.validate();
  const std::size_t authors = spec.profiles.size();
  SynthCorpus out;
  out.raw.resize(authors * spec.docs_per_author);
  out.tagged.resize(out.raw.size());

#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t k = 0; k < out.raw.size(); ++k) {
    const std::size_t a = k / spec.docs_per_author, d = k % spec.docs_per_author;
    const AuthorProfile& p = spec.profiles[a];
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(d)};
    Rng rng(seq);
    std::vector<double> template_weights;
    for (const auto& t : p.templates) template_weights.push_back(t.weight);

    const std::size_t sentences = p.min_sentences + rng() % (p.max_sentences - p.min_sentences + 1);
    TaggedDocument doc;
    std::string text;
    for (std::size_t s = 0; s < sentences; ++s) {
      const SyntaxTemplate& tpl = p.templates[draw_index(rng, template_weights)];
      TaggedSentence sent;
      for (std::size_t tag : tpl.tags) {
        const TagLexicon& lex = p.lexicons.at(tag);
        std::string word = lex.words[draw_index(rng, lex.weights)];
        if (sent.tokens.empty() && !word.empty()) word[0] = static_cast<char>(std::toupper(word[0]));
        sent.tokens.push_back(std::move(word));
        sent.tags.push_back(tag);
      }
      for (const auto& tok : sent.tokens) {
        if (!text.empty()) text += ' ';
        text += tok;
      }
      doc.push_back(std::move(sent));
    }
    out.raw[k] = {p.id, std::move(text)};
    out.tagged[k] = std::move(doc);
  }
  return out;
}

void write_corpus(const SynthCorpus& corpus, const std::string& prefix) {
  std::ofstream raw(prefix + ".jsonl", std::ios::binary);
  if (!raw) throw std::runtime_error("cannot write '" + prefix + ".jsonl'");
  write_dataset_jsonl(raw, corpus.raw);
  std::ofstream tagged(prefix + ".tagged.txt", std::ios::binary);
  if (!tagged) throw std::runtime_error("cannot write '" + prefix + ".tagged.txt'");
  write_tagged_documents(tagged, corpus.tagged);
}

}  // namespace stylehan
