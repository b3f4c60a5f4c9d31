#pragma once

// Label lattice and guess-word orders.
//
// A label is either the top element or a finite word over {f, i}, where
// 'f' marks a finitary guess and 'i' an infinitary one.  Words of length
// at most n together with top form the universe Labels_n (size 2^(n+1)).
// Words compare positionwise with end-of-string < i < f; top is greatest.
// The same word order (without top) serves for guess strings.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lowspeed {

// Word alphabet.  'i' = infinitary, 'f' = finitary.
inline constexpr char kInf = 'i';
inline constexpr char kFin = 'f';

struct Label {
  bool top = false;
  std::string word;  // over {'f','i'}; empty = the least word

  static Label Top() { return Label{true, {}}; }
  static Label Word(std::string w) { return Label{false, std::move(w)}; }
  static Label Empty() { return Label{false, {}}; }

  bool operator==(const Label& o) const {
    return top == o.top && (top || word == o.word);
  }
  bool operator!=(const Label& o) const { return !(*this == o); }
};

inline void require_word(const Label& l, const char* who) {
  if (l.top) throw std::invalid_argument(std::string(who) + ": top has no word form");
  for (char c : l.word)
    if (c != kInf && c != kFin)
      throw std::invalid_argument(std::string(who) + ": bad symbol in word");
}

// Serialization alphabet: "T" for top, otherwise the word itself ('f'/'i'),
// with the empty word serializing as "".
inline std::string format_label(const Label& l) {
  if (l.top) return "T";
  return l.word;
}

inline Label parse_label(const std::string& s) {
  if (s == "T") return Label::Top();
  for (char c : s)
    if (c != kInf && c != kFin)
      throw std::invalid_argument("parse_label: bad symbol '" + std::string(1, c) + "'");
  return Label::Word(s);
}

// Positionwise comparison with end-of-string < i < f; top greatest.
// Returns <0, 0, >0.
inline int label_cmp(const Label& a, const Label& b) {
  if (a.top || b.top) {
    if (a.top && b.top) return 0;
    return a.top ? 1 : -1;
  }
  auto rank = [](char c) { return c == kFin ? 2 : 1; };  // end-of-string ranks 0
  std::size_t n = std::min(a.word.size(), b.word.size());
  for (std::size_t j = 0; j < n; ++j) {
    int d = rank(a.word[j]) - rank(b.word[j]);
    if (d != 0) return d;
  }
  if (a.word.size() == b.word.size()) return 0;
  return a.word.size() > b.word.size() ? 1 : -1;  // proper prefix is smaller
}

inline bool label_lt(const Label& a, const Label& b) { return label_cmp(a, b) < 0; }
inline bool label_le(const Label& a, const Label& b) { return label_cmp(a, b) <= 0; }

inline const Label& label_min(const Label& a, const Label& b) {
  return label_cmp(a, b) <= 0 ? a : b;
}

// Immediate predecessor inside Labels_n.  Undefined for the empty word
// (least element); words longer than n are outside the universe.
inline Label label_pred(const Label& l, std::size_t n) {
  if (l.top) return Label::Word(std::string(n, kFin));
  require_word(l, "label_pred");
  if (l.word.size() > n)
    throw std::invalid_argument("label_pred: word exceeds universe length");
  if (l.word.empty())
    throw std::domain_error("label_pred: empty word has no predecessor");
  std::string w = l.word;
  if (w.back() == kInf) {
    w.pop_back();  // dropping a trailing i steps down one
    return Label::Word(std::move(w));
  }
  // Trailing f: flip it to i; below full length the gap is filled with
  // the largest possible suffix, i.e. pad with f up to length n.
  w.back() = kInf;
  if (l.word.size() < n) w.append(n - l.word.size(), kFin);
  return Label::Word(std::move(w));
}

// Greatest element of Labels_n that is <= the given label.  Words within
// length already qualify; longer words truncate (nothing in Labels_n fits
// between a word and its length-n prefix); top caps at top.
inline Label label_cap(const Label& l, std::size_t n) {
  if (l.top) return Label::Top();
  require_word(l, "label_cap");
  if (l.word.size() <= n) return l;
  return Label::Word(l.word.substr(0, n));
}

// ---------------------------------------------------------------------------
// Outcome strings and guess words.
//
// An outcome string lists per-requirement outcomes in priority order
// M_0 L_0 P_0 M_1 ...: requirement triple e occupies slots 3e..3e+2.
// M and L outcomes are either "infinitary" or a witness node; P outcomes
// are always nodes.

enum class ReqKind { M, L, P };

struct Outcome {
  bool infinitary = false;
  std::string node;  // witness bit-string when not infinitary

  static Outcome Infty() { return Outcome{true, {}}; }
  static Outcome Node(std::string v) { return Outcome{false, std::move(v)}; }

  bool operator==(const Outcome& o) const {
    return infinitary == o.infinitary && (infinitary || node == o.node);
  }
};

struct OutcomeString {
  std::vector<Outcome> entries;

  static ReqKind kind_at(std::size_t slot) {
    switch (slot % 3) {
      case 0: return ReqKind::M;
      case 1: return ReqKind::L;
      default: return ReqKind::P;
    }
  }

  std::size_t size() const { return entries.size(); }

  const Outcome& at(std::size_t slot) const {
    if (slot >= entries.size())
      throw std::out_of_range("OutcomeString: slot beyond entries");
    return entries[slot];
  }

  // Accessors by requirement name.
  const Outcome& m(std::size_t e) const { return at(3 * e); }
  const Outcome& l(std::size_t e) const { return at(3 * e + 1); }
  const Outcome& p(std::size_t e) const { return at(3 * e + 2); }

  void push(Outcome o) {
    if (kind_at(entries.size()) == ReqKind::P && o.infinitary)
      throw std::invalid_argument("OutcomeString: P outcomes are always nodes");
    entries.push_back(std::move(o));
  }
};

// Guess word of an outcome string: one symbol per M-entry, i for the
// infinitary outcome and f for any witness node.
inline Label guess_word_of(const OutcomeString& pi) {
  std::string w;
  for (std::size_t slot = 0; slot < pi.size(); slot += 3)
    w.push_back(pi.entries[slot].infinitary ? kInf : kFin);
  return Label::Word(std::move(w));
}

// Suffix of a guess word above requirement index e: symbols for
// M_{e+1}, M_{e+2}, ...  (0-indexed positions e+1 onward).
inline Label guess_word_above(const Label& guesses, std::size_t e) {
  require_word(guesses, "guess_word_above");
  if (e + 1 >= guesses.word.size()) return Label::Empty();
  return Label::Word(guesses.word.substr(e + 1));
}

// The watching relation between lowness requirements: the watcher's guess
// word is strictly below the watched one's in the word order.
inline bool watches(const Label& guess1, const Label& guess2) {
  require_word(guess1, "watches");
  require_word(guess2, "watches");
  return label_lt(guess1, guess2);
}

// Wrapper taking full outcome-string guesses of L_{d1} and L_{d2}; a guess
// by L_d covers slots 0..3d, so its M-projection has length d+1.
inline bool watches(std::size_t d1, const OutcomeString& nu1, std::size_t d2,
                    const OutcomeString& nu2) {
  if (nu1.size() != 3 * d1 + 1 || nu2.size() != 3 * d2 + 1)
    throw std::invalid_argument("watches: guess length does not match requirement index");
  return watches(guess_word_of(nu1), guess_word_of(nu2));
}

}  // namespace lowspeed
