#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spco/core/error.hpp"
#include "spco/core/phoneme.hpp"
#include "spco/core/types.hpp"

namespace spco::lexicon {

struct LexiconParams {
  std::size_t alphabet_size = 30;
  double p_len = 0.5;  // geometric continue probability of the base length
  double lambda = 1.0;
  int max_word_length = 10;

  void validate() const {
    if (alphabet_size == 0) throw SpecError("lexicon: alphabet size must be >= 1");
    if (!(p_len > 0.0 && p_len < 1.0)) throw SpecError("lexicon: p_len must lie in (0, 1)");
    if (!(lambda > 0.0)) throw SpecError("lexicon: lambda must be > 0");
    if (max_word_length < 1) throw SpecError("lexicon: max word length must be >= 1");
  }
};

// DP-unigram word counts stored in a trie so that all words starting at a
// position can be looked up in one walk.
class Lexicon {
 public:
  static constexpr int kNone = -1;

  Lexicon() : Lexicon(LexiconParams{}) {}
  explicit Lexicon(LexiconParams params) : params_(params) {
    params_.validate();
    children_.assign(params_.alphabet_size, kNone);
    counts_.assign(1, 0);
    log_base_.resize(static_cast<std::size_t>(params_.max_word_length) + 1, 0.0);
    base_.resize(log_base_.size(), 0.0);
    for (int L = 1; L <= params_.max_word_length; ++L) {
      log_base_[L] = log_base_length(L);
      base_[L] = std::exp(log_base_[L]);
    }
  }

  const LexiconParams& params() const { return params_; }
  long total() const { return total_; }
  int types() const { return types_; }
  bool empty() const { return total_ == 0; }

  // Base measure: geometric length times uniform symbols.
  double log_base_length(int L) const {
    return std::log1p(-params_.p_len) + (L - 1) * std::log(params_.p_len) -
           L * std::log(static_cast<double>(params_.alphabet_size));
  }
  double log_base(int L) const {
    return L <= params_.max_word_length ? log_base_[L] : log_base_length(L);
  }
  double base(int L) const { return L <= params_.max_word_length ? base_[L] : std::exp(log_base_length(L)); }

  int root() const { return 0; }
  int child(int node, Phoneme p) const {
    return node == kNone ? kNone : children_[static_cast<std::size_t>(node) * params_.alphabet_size + p];
  }
  int node_count(int node) const { return node == kNone ? 0 : counts_[node]; }

  int count(const Word& w) const {
    int node = root();
    for (Phoneme p : w) {
      node = child(node, p);
      if (node == kNone) return 0;
    }
    return counts_[node];
  }

  // Predictive probability of a word of length L seen c times, with
  // `extra_total` customers seated beyond the stored counts.
  double prob(int c, int L, long extra_total = 0) const {
    return (c + params_.lambda * base(L)) / (static_cast<double>(total_ + extra_total) + params_.lambda);
  }
  double prob(const Word& w) const { return prob(count(w), static_cast<int>(w.size())); }
  double log_prob(const Word& w) const { return std::log(prob(w)); }

  void add(const Word& w, int n = 1) {
    if (w.empty()) throw SpecError("lexicon: empty word");
    if (n < 0) throw SpecError("lexicon: negative count");
    if (n == 0) return;
    int node = root();
    for (Phoneme p : w) {
      if (p >= params_.alphabet_size) throw SpecError("lexicon: symbol outside alphabet");
      const std::size_t slot = static_cast<std::size_t>(node) * params_.alphabet_size + p;
      if (children_[slot] == kNone) {
        children_[slot] = static_cast<int>(counts_.size());
        counts_.push_back(0);
        children_.resize(children_.size() + params_.alphabet_size, kNone);
      }
      node = children_[static_cast<std::size_t>(node) * params_.alphabet_size + p];
    }
    if (counts_[node] == 0) ++types_;
    counts_[node] += n;
    total_ += n;
  }

  void remove(const Word& w, int n = 1) {
    int node = root();
    for (Phoneme p : w) {
      node = child(node, p);
      if (node == kNone) throw CorruptionError("lexicon: removing absent word");
    }
    if (counts_[node] < n) throw CorruptionError("lexicon: count underflow");
    counts_[node] -= n;
    if (counts_[node] == 0) --types_;
    total_ -= n;
  }

  void add_words(const WordSequence& words) {
    for (const auto& w : words) add(w);
  }

  void merge(const Lexicon& other) {
    for (const auto& [w, c] : other.entries()) add(w, c);
  }

  // Words with positive count in lexicographic order.
  std::vector<std::pair<Word, int>> entries() const {
    std::vector<std::pair<Word, int>> out;
    Word prefix;
    collect(root(), prefix, out);
    return out;
  }

  std::map<Word, int> to_map() const {
    std::map<Word, int> m;
    for (auto& [w, c] : entries()) m.emplace(std::move(w), c);
    return m;
  }

  bool operator==(const Lexicon& o) const { return to_map() == o.to_map(); }

  nlohmann::json to_json(const PhonemeAlphabet& alphabet) const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [w, c] : entries()) j[alphabet.render(w)] = c;
    return j;
  }

  static Lexicon from_json(const nlohmann::json& j, const PhonemeAlphabet& alphabet, LexiconParams params) {
    Lexicon lex(params);
    for (auto it = j.begin(); it != j.end(); ++it) lex.add(alphabet.parse(it.key()), it.value().get<int>());
    return lex;
  }

 private:
  void collect(int node, Word& prefix, std::vector<std::pair<Word, int>>& out) const {
    if (counts_[node] > 0) out.emplace_back(prefix, counts_[node]);
    for (std::size_t p = 0; p < params_.alphabet_size; ++p) {
      const int c = children_[static_cast<std::size_t>(node) * params_.alphabet_size + p];
      if (c == kNone) continue;
      prefix.push_back(static_cast<Phoneme>(p));
      collect(c, prefix, out);
      prefix.pop_back();
    }
  }

  LexiconParams params_;
  std::vector<int> children_;  // node * A + symbol -> child node
  std::vector<int> counts_;
  std::vector<double> log_base_;
  std::vector<double> base_;
  long total_ = 0;
  int types_ = 0;
};

// Lexicon holding the word counts of the given sentences.
inline Lexicon register_words(const std::vector<WordSequence>& sentences, LexiconParams params) {
  Lexicon lex(params);
  for (const auto& s : sentences) lex.add_words(s);
  return lex;
}

}  // namespace spco::lexicon
