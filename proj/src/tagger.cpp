#include "stylehan/tagger.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "stylehan/corpus_io.hpp"
#include "stylehan/tensor.hpp"

namespace stylehan {

namespace {

constexpr const char* kStart = "<s>";
constexpr const char* kEnd = "</s>";

std::string word_shape(const std::string& w) {
  bool upper_first = !w.empty() && std::isupper(static_cast<unsigned char>(w[0]));
  bool all_upper = !w.empty(), digit = false, hyphen = false, alpha = false;
  for (char c : w) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) {
      alpha = true;
      if (!std::isupper(u)) all_upper = false;
    }
    if (std::isdigit(u)) digit = true;
    if (c == '-') hyphen = true;
  }
  std::string s;
  s += upper_first ? 'X' : 'x';
  s += (alpha && all_upper) ? 'U' : '_';
  s += digit ? 'd' : '_';
  s += hyphen ? '-' : '_';
  return s;
}

std::string lowered_at(const std::vector<std::string>& tokens, long i) {
  if (i < 0) return kStart;
  if (i >= static_cast<long>(tokens.size())) return kEnd;
  return to_lower(tokens[static_cast<std::size_t>(i)]);
}

std::string tag_at(const std::vector<std::size_t>& tags, long i) {
  if (i < 0) return kStart;
  return TagSet::standard().name(tags[static_cast<std::size_t>(i)]);
}

std::size_t argmax(const std::array<double, PerceptronTagger::kClasses>& scores) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return best;
}

}  // namespace

std::vector<std::string> tagger_features(const std::vector<std::string>& tokens, std::size_t pos,
                                         const std::vector<std::size_t>& left_tags) {
  const long i = static_cast<long>(pos);
  const std::string& word = tokens[pos];
  const std::string lw = to_lower(word);
  std::vector<std::string> f;
  f.reserve(18);
  f.emplace_back("bias");
  f.push_back("w=" + word);
  f.push_back("lw=" + lw);
  for (std::size_t k = 1; k <= 3; ++k)
    if (lw.size() >= k) f.push_back("s" + std::to_string(k) + "=" + lw.substr(lw.size() - k));
  f.push_back("p1=" + lw.substr(0, 1));
  f.push_back("shape=" + word_shape(word));
  f.push_back("pw=" + lowered_at(tokens, i - 1));
  f.push_back("pw2=" + lowered_at(tokens, i - 2));
  f.push_back("nw=" + lowered_at(tokens, i + 1));
  f.push_back("nw2=" + lowered_at(tokens, i + 2));
  const std::string next = lowered_at(tokens, i + 1);
  f.push_back("ns3=" + (next.size() >= 3 ? next.substr(next.size() - 3) : next));
  const std::string pt = tag_at(left_tags, i - 1);
  f.push_back("pt=" + pt);
  f.push_back("pt2=" + tag_at(left_tags, i - 2) + "|" + pt);
  f.push_back("ptw=" + pt + "|" + lw);
  f.push_back("ptnw=" + pt + "|" + next);
  return f;
}

std::size_t PerceptronTagger::predict(const std::vector<std::string>& features) const {
  std::array<double, kClasses> scores{};
  for (const auto& feat : features) {
    auto it = weights_.find(feat);
    if (it == weights_.end()) continue;
    for (std::size_t c = 0; c < kClasses; ++c) scores[c] += it->second[c];
  }
  return argmax(scores) + 1;
}

TaggedSentence PerceptronTagger::tag(const std::vector<std::string>& tokens) const {
  const TagSet& tags = TagSet::standard();
  TaggedSentence out;
  out.tokens = tokens;
  out.tags.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (auto forced = tags.punctuation_tag(tokens[i])) {
      out.tags.push_back(*forced);
      continue;
    }
    out.tags.push_back(predict(tagger_features(tokens, i, out.tags)));
  }
  return out;
}

PerceptronTagger PerceptronTagger::train(const std::vector<TaggedSentence>& corpus, int epochs, std::uint64_t seed) {
  if (corpus.empty()) throw std::invalid_argument("tagger training corpus is empty");
  if (epochs < 1) throw std::invalid_argument("tagger training needs at least one epoch");
  const TagSet& tagset = TagSet::standard();
  for (const auto& s : corpus) {
    if (s.tokens.size() != s.tags.size()) throw std::invalid_argument("tagged sentence has mismatched lengths");
    for (std::size_t t : s.tags)
      if (t == kPadId || t >= tagset.size()) throw std::invalid_argument("tag id " + std::to_string(t) + " is not in the tag set");
  }

  struct Accumulator {
    Weights weights{};
    std::array<double, kClasses> totals{};
    std::array<std::int64_t, kClasses> stamps{};
  };
  std::unordered_map<std::string, Accumulator> acc;
  std::int64_t instances = 0;

  auto score = [&](const std::vector<std::string>& features) {
    std::array<double, kClasses> scores{};
    for (const auto& feat : features) {
      auto it = acc.find(feat);
      if (it == acc.end()) continue;
      for (std::size_t c = 0; c < kClasses; ++c) scores[c] += it->second.weights[c];
    }
    return argmax(scores);
  };
  auto bump = [&](const std::string& feat, std::size_t cls, float delta) {
    Accumulator& a = acc[feat];
    a.totals[cls] += static_cast<double>(instances - a.stamps[cls]) * a.weights[cls];
    a.stamps[cls] = instances;
    a.weights[cls] += delta;
  };

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const TaggedSentence& s = corpus[idx];
      std::vector<std::size_t> left;
      left.reserve(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (auto forced = tagset.punctuation_tag(s.tokens[i])) {
          left.push_back(*forced);
          continue;
        }
        ++instances;
        const auto features = tagger_features(s.tokens, i, left);
        const std::size_t guess = score(features);
        const std::size_t truth = s.tags[i] - 1;
        if (guess != truth) {
          for (const auto& feat : features) {
            bump(feat, truth, 1.0f);
            bump(feat, guess, -1.0f);
          }
        }
        left.push_back(guess + 1);
      }
    }
  }

  PerceptronTagger tagger;
  const double n = static_cast<double>(std::max<std::int64_t>(instances, 1));
  for (auto& [feat, a] : acc) {
    Weights averaged{};
    bool nonzero = false;
    for (std::size_t c = 0; c < kClasses; ++c) {
      const double total = a.totals[c] + static_cast<double>(instances - a.stamps[c]) * a.weights[c];
      averaged[c] = static_cast<float>(total / n);
      nonzero = nonzero || averaged[c] != 0.0f;
    }
    if (nonzero) tagger.weights_.emplace(feat, averaged);
  }
  return tagger;
}

void PerceptronTagger::save(std::ostream& out) const {
  std::vector<const std::pair<const std::string, Weights>*> entries;
  entries.reserve(weights_.size());
  for (const auto& e : weights_) entries.push_back(&e);
  std::sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return a->first < b->first; });
  out << "stylehan-tagger 1 " << entries.size() << "\n";
  out << std::hexfloat;
  for (const auto* e : entries) {
    out << e->first;
    for (float w : e->second) out << ' ' << w;
    out << '\n';
  }
  out << std::defaultfloat;
}

PerceptronTagger PerceptronTagger::load(std::istream& in) {
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  if (!(in >> magic >> version >> count) || magic != "stylehan-tagger" || version != 1)
    throw FormatError("not a tagger model file");
  std::string line;
  std::getline(in, line);
  PerceptronTagger tagger;
  for (std::size_t n = 0; n < count; ++n) {
    if (!std::getline(in, line)) throw FormatError("tagger model truncated at entry " + std::to_string(n));
    std::istringstream fields(line);
    std::string feat;
    fields >> feat;
    Weights w{};
    for (std::size_t c = 0; c < kClasses; ++c) {
      std::string token;
      if (!(fields >> token)) throw FormatError("tagger model entry '" + feat + "' has too few weights");
      w[c] = std::strtof(token.c_str(), nullptr);
    }
    tagger.weights_.emplace(std::move(feat), w);
  }
  return tagger;
}

void PerceptronTagger::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write tagger model '" + path + "'");
  save(out);
}

PerceptronTagger PerceptronTagger::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read tagger model '" + path + "'");
  return load(in);
}

double token_accuracy(const PerceptronTagger& tagger, const std::vector<TaggedSentence>& reference) {
  std::size_t correct = 0, total = 0;
  for (const auto& s : reference) {
    const auto predicted = tagger.tag(s.tokens);
    for (std::size_t i = 0; i < s.size(); ++i) correct += predicted.tags[i] == s.tags[i];
    total += s.size();
  }
  if (total == 0) throw std::invalid_argument("token_accuracy: no tokens");
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::string bundled_corpus_path() {
  const char* dir = std::getenv("STYLEHAN_DATA_DIR");
  return std::string(dir && *dir ? dir : STYLEHAN_DATA_DIR) + "/tagged_corpus.txt";
}

PerceptronTagger default_tagger() {
  return PerceptronTagger::train(read_tagged_sentences(bundled_corpus_path()), kDefaultTaggerEpochs, kDefaultTaggerSeed);
}

}  // namespace stylehan
