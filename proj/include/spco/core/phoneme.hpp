#pragma once

#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spco/core/error.hpp"
#include "spco/core/types.hpp"

namespace spco {

// Finite symbol inventory. Symbols are rendered by name and stored by code.
class PhonemeAlphabet {
 public:
  explicit PhonemeAlphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.empty() || symbols_.size() > 255)
      throw SpecError("phoneme alphabet must hold 1..255 symbols");
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (!index_.emplace(symbols_[i], static_cast<Phoneme>(i)).second)
        throw SpecError("duplicate phoneme symbol '" + symbols_[i] + "'");
    }
  }

  // 30 consonant-vowel syllables: {k,s,t,n,m,r} x {a,i,u,e,o}.
  static const PhonemeAlphabet& syllables() {
    static const PhonemeAlphabet kAlphabet = [] {
      std::vector<std::string> s;
      for (const char* c : {"k", "s", "t", "n", "m", "r"})
        for (const char* v : {"a", "i", "u", "e", "o"}) s.push_back(std::string(c) + v);
      return PhonemeAlphabet(std::move(s));
    }();
    return kAlphabet;
  }

  std::size_t size() const { return symbols_.size(); }
  const std::string& symbol(Phoneme p) const { return symbols_.at(p); }

  Phoneme code(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw SpecError("unknown phoneme symbol '" + std::string(name) + "'");
    return it->second;
  }

  // "ka ri su" -> codes. Empty text gives an empty sequence.
  PhonemeSeq parse(std::string_view text) const {
    PhonemeSeq out;
    std::istringstream in{std::string(text)};
    std::string tok;
    while (in >> tok) out.push_back(code(tok));
    return out;
  }

  std::string render(const PhonemeSeq& seq, std::string_view sep = " ") const {
    std::string out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i) out += sep;
      out += symbol(seq[i]);
    }
    return out;
  }

  bool contains(const PhonemeSeq& seq) const {
    for (Phoneme p : seq)
      if (p >= symbols_.size()) return false;
    return true;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, Phoneme> index_;
};

}  // namespace spco
