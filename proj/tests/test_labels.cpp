// Label order, predecessor, cap, guess words, and the watching relation,
// checked against brute-force reference implementations.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>
#include <vector>

#include "lowspeed/labels.hpp"

using namespace lowspeed;

namespace {

// Reference order: rank sequences (i -> 1, f -> 2) compared lexicographically
// with end-of-sequence ranking 0; top above everything.
int ref_cmp(const Label& a, const Label& b) {
  if (a.top || b.top) return (a.top ? 1 : 0) - (b.top ? 1 : 0);
  auto ranks = [](const std::string& w, std::size_t len) {
    std::vector<int> r;
    for (char c : w) r.push_back(c == kFin ? 2 : 1);
    while (r.size() < len) r.push_back(0);
    return r;
  };
  std::size_t len = std::max(a.word.size(), b.word.size());
  std::vector<int> ra = ranks(a.word, len), rb = ranks(b.word, len);
  if (ra < rb) return -1;
  return ra == rb ? 0 : 1;
}

// All of Labels_n: words of length <= n plus top.
std::vector<Label> universe(int n) {
  std::vector<Label> out{Label::Top()};
  std::vector<std::string> words{""};
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (static_cast<int>(words[i].size()) >= n) continue;
    words.push_back(words[i] + kInf);
    words.push_back(words[i] + kFin);
  }
  for (auto& w : words) out.push_back(Label::Word(std::move(w)));
  return out;
}

}  // namespace

TEST_CASE("label comparison matches the rank-sequence reference") {
  for (int n = 1; n <= 6; ++n) {
    auto ls = universe(n);
    for (const Label& a : ls)
      for (const Label& b : ls) {
        int got = label_cmp(a, b);
        int want = ref_cmp(a, b);
        INFO("n=" << n << " a=" << format_label(a) << " b=" << format_label(b));
        REQUIRE((got < 0 ? -1 : got > 0 ? 1 : 0) == want);
      }
  }
}

TEST_CASE("the universe has 2^{n+1} labels and a strict total order") {
  for (int n = 1; n <= 6; ++n) {
    auto ls = universe(n);
    REQUIRE(static_cast<std::int64_t>(ls.size()) == (std::int64_t{1} << (n + 1)));
    std::sort(ls.begin(), ls.end(), label_lt);
    for (std::size_t i = 0; i + 1 < ls.size(); ++i)
      REQUIRE(label_cmp(ls[i], ls[i + 1]) < 0);
    REQUIRE(label_cmp(ls.front(), Label::Empty()) == 0);
    REQUIRE(ls.back().top);
  }
}

TEST_CASE("the length-2 chain reads top, ff, fi, f, if, ii, i, empty") {
  auto ls = universe(2);
  std::sort(ls.begin(), ls.end(), [](const Label& a, const Label& b) {
    return label_cmp(a, b) > 0;
  });
  std::vector<std::string> want{"T", "ff", "fi", "f", "if", "ii", "i", ""};
  REQUIRE(ls.size() == want.size());
  for (std::size_t i = 0; i < ls.size(); ++i) REQUIRE(format_label(ls[i]) == want[i]);
}

TEST_CASE("label_pred steps down the sorted chain") {
  for (int n = 1; n <= 6; ++n) {
    auto ls = universe(n);
    std::sort(ls.begin(), ls.end(), [](const Label& a, const Label& b) {
      return label_cmp(a, b) > 0;
    });
    for (std::size_t i = 0; i + 1 < ls.size(); ++i) {
      Label p = label_pred(ls[i], static_cast<std::size_t>(n));
      INFO("n=" << n << " of " << format_label(ls[i]));
      REQUIRE(label_cmp(p, ls[i + 1]) == 0);
    }
  }
}

TEST_CASE("label_pred spot values") {
  REQUIRE(format_label(label_pred(Label::Top(), 3)) == "fff");
  REQUIRE(format_label(label_pred(Label::Top(), 1)) == "f");
  REQUIRE(format_label(label_pred(Label::Word("i"), 4)) == "");
  REQUIRE(format_label(label_pred(Label::Word("fi"), 2)) == "f");
  REQUIRE(format_label(label_pred(Label::Word("f"), 2)) == "if");
  REQUIRE(format_label(label_pred(Label::Word("if"), 2)) == "ii");
  REQUIRE(format_label(label_pred(Label::Word("ii"), 2)) == "i");
}

TEST_CASE("label_cap truncates into the smaller universe") {
  REQUIRE(format_label(label_cap(Label::Word("ifi"), 2)) == "if");
  REQUIRE(format_label(label_cap(Label::Word("if"), 3)) == "if");
  REQUIRE(label_cap(Label::Top(), 2).top);
  // Capping is monotone: order never reverses.
  for (const Label& a : universe(4))
    for (const Label& b : universe(4)) {
      if (a.top || b.top) continue;
      if (label_cmp(a, b) <= 0)
        REQUIRE(label_cmp(label_cap(a, 2), label_cap(b, 2)) <= 0);
    }
}

TEST_CASE("parse and format round-trip") {
  for (const Label& l : universe(5))
    REQUIRE(label_cmp(parse_label(format_label(l)), l) == 0);
  REQUIRE_THROWS_AS(parse_label("ixf"), std::invalid_argument);
}

TEST_CASE("guess words project the M outcomes") {
  OutcomeString pi;
  pi.push(Outcome::Infty());          // M0
  pi.push(Outcome::Infty());          // L0
  pi.push(Outcome::Node("1"));        // P0
  pi.push(Outcome::Node("10"));       // M1
  pi.push(Outcome::Node("10"));       // L1
  pi.push(Outcome::Node("100"));      // P1
  pi.push(Outcome::Infty());          // M2
  REQUIRE(format_label(guess_word_of(pi)) == "ifi");
  REQUIRE(format_label(guess_word_above(Label::Word("ifi"), 0)) == "fi");
  REQUIRE(format_label(guess_word_above(Label::Word("ifi"), 1)) == "i");
  REQUIRE(format_label(guess_word_above(Label::Word("ifi"), 2)) == "");
  REQUIRE(format_label(guess_word_above(Label::Word("ifi"), 7)) == "");
}

TEST_CASE("P outcomes must be nodes") {
  OutcomeString pi;
  pi.push(Outcome::Infty());
  pi.push(Outcome::Infty());
  REQUIRE_THROWS_AS(pi.push(Outcome::Infty()), std::invalid_argument);
}

TEST_CASE("watching is the strict word order on guesses") {
  REQUIRE(watches(Label::Word("i"), Label::Word("f")));
  REQUIRE_FALSE(watches(Label::Word("f"), Label::Word("i")));
  REQUIRE_FALSE(watches(Label::Word("i"), Label::Word("i")));
  REQUIRE(watches(Label::Word("if"), Label::Word("f")));  // deeper can watch shallower

  // A guess of L_d covers slots 0..3d, so d = 0 means exactly one entry.
  OutcomeString a, b;
  a.push(Outcome::Infty());    // M0 = i
  b.push(Outcome::Node("0"));  // M0 = f
  REQUIRE(watches(0, a, 0, b));
  REQUIRE_FALSE(watches(0, b, 0, a));
  REQUIRE_THROWS_AS(watches(1, a, 0, b), std::invalid_argument);
}
