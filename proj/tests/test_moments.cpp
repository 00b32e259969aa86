#include <gtest/gtest.h>

#include <random>

#include "vdm/error.hpp"
#include "vdm/moments.hpp"

using namespace vdm;

namespace {

Rational Q(const char* s) { return parse_rational(s); }
PiecewisePoly F(const char* s) { return parse_function(s); }
Word W(const char* s) { return parse_word(s); }

Rational frac(long p, long q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

PiecewisePoly random_coeff(std::mt19937& rng) {
  std::uniform_int_distribution<int> c(-3, 3), d(0, 2);
  std::vector<Rational> coeffs;
  for (int k = d(rng); k >= 0; --k) coeffs.push_back(frac(c(rng), 1 + k));
  auto p = PiecewisePoly(Polynomial(coeffs));
  return p.is_zero() ? PiecewisePoly::one() : p;
}

/// b_1 X^{e_1} b_2 X^{e_2} ... b_n X^{e_n} as (coefficient, letter) pairs.
using Pairs = std::vector<std::pair<PiecewisePoly, bool>>;

Word build(const Pairs& pairs) {
  std::vector<Letter> letters;
  for (const auto& [b, star] : pairs) {
    letters.push_back(Letter::coefficient(b));
    letters.push_back(star ? Letter::xstar() : Letter::x());
  }
  return Word(std::move(letters));
}

Pairs random_pairs(std::mt19937& rng, const std::vector<bool>& pattern) {
  Pairs out;
  for (bool s : pattern) out.emplace_back(random_coeff(rng), s);
  return out;
}

std::vector<bool> alternating_pattern(int n, bool first_star) {
  std::vector<bool> p;
  for (int i = 0; i < n; ++i) p.push_back(first_star == (i % 2 == 0));
  return p;
}

}  // namespace

TEST(Word, Parsing) {
  EXPECT_EQ(W("X* [t] X X* [1 - t^2] X").to_string(), "X* [t] X X* [1 - t^2] X");
  EXPECT_EQ(W("(X* X)^2"), W("X* X X* X"));
  EXPECT_EQ(W("X*X"), W("X* X"));
  EXPECT_EQ(W("[t] [t]"), W("[t^2]"));
  EXPECT_EQ(W("X [1] X*"), W("X X*"));
  EXPECT_TRUE(W("X [0] X*").is_zero());
  EXPECT_EQ(W("").to_string(), "1");
  EXPECT_EQ(W("X [piecewise{ [0,1/2]: t; (1/2,1]: 1 - t }] X*").matrix_letters(), 2);
  EXPECT_EQ(W("(X X*)^0"), Word());
  EXPECT_EQ(W("X* X X X*").star_pattern().to_string(), "*11*");
  EXPECT_EQ(W("X [t] X* X*").adjoint(), W("X X [t] X*"));
  EXPECT_THROW(W("X + X*"), ParseError);
  EXPECT_THROW(W("X Y"), ParseError);
  EXPECT_THROW(W("(X X*"), ParseError);
  EXPECT_THROW(W("X [t"), ParseError);
  try {
    W("X X* ]");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 5u);
  }
}

TEST(Word, Expressions) {
  const auto s = parse_word_expression("((X* X)^2 - 2) (X X* + [t])");
  EXPECT_EQ(s.terms.size(), 4u);
  const auto d = parse_word_expression("X X* - X X*");
  EXPECT_TRUE(d.terms.empty());
  const auto sq = parse_word_expression("(X - X*)^2");
  EXPECT_EQ(sq.terms.size(), 4u);
  const auto neg = parse_word_expression("-X + 3 X*");
  ASSERT_EQ(neg.terms.size(), 2u);
  EXPECT_EQ(neg.terms[0].first, -1);
  EXPECT_EQ(neg.terms[1].first, 1);
  EXPECT_EQ(neg.terms[1].second, W("[3] X*"));
}

TEST(Moments, FirstMomentsAndSpecExamples) {
  MomentEngine e;
  EXPECT_EQ(e.expectation(W("X* X")).value, F("1"));
  EXPECT_EQ(e.expectation(W("X X*")).value, F("1"));
  EXPECT_EQ(e.expectation(W("(X* X)^4")).value, F("14 + 1/2 + t*(1 - t)"));
  EXPECT_EQ(e.expectation(W("(X X*)^4")).value, F("44/3"));
  EXPECT_EQ(e.expectation(W("X [t] X* X [t] X*")).value, F("7/12"));
  EXPECT_EQ(e.expectation(W("X")).value, F("0"));
  EXPECT_EQ(e.expectation(W("X X")).value, F("0"));
  EXPECT_EQ(e.expectation(W("(X X*)^2 [t] (X X*)^2")).value, F("5 + 14/3*t"));
  EXPECT_EQ(e.expectation(W("")).value, F("1"));
  EXPECT_EQ(e.expectation(W("[1 + t]")).value, F("1 + t"));
  EXPECT_EQ(e.alternating_even_moment(W("[t] X* X [2]")), F("2*t"));
  EXPECT_THROW(e.alternating_even_moment(W("X X")), ContractError);
  EXPECT_THROW(e.alternating_even_moment(W("X X* X")), ContractError);
}

TEST(Moments, Traces) {
  MomentEngine e;
  EXPECT_EQ(e.trace_moment(W("(X* X)^3")), 5);
  EXPECT_EQ(e.trace_moment(W("(X X*)^3")), 5);
  EXPECT_EQ(e.trace_moment(W("(X X*)^4")), Q("44/3"));
  EXPECT_EQ(e.trace_moment(W("(X* X)^2")), 2);
  EXPECT_EQ(e.trace_moment(parse_word_expression("(X* X)^2 - 2")), 0);
}

TEST(Moments, DiagonalLimit) {
  MomentEngine e;
  EXPECT_EQ(e.diagonal_limit(W("(X* X)^4"), Q("1/2")), Q("59/4"));
  for (const auto& t : {Q("0"), Q("1/3"), Q("1")}) {
    EXPECT_EQ(e.diagonal_limit(W("X* X"), t), 1);
    EXPECT_EQ(e.diagonal_limit(W("(X X*)^4"), t), Q("44/3"));
  }
  EXPECT_THROW(e.diagonal_limit(W("X X"), Q("1/2")), ContractError);
  EXPECT_THROW(e.diagonal_limit(W("X* X"), Q("2")), ArgumentError);
}

TEST(Moments, ScalarCheck) {
  MomentEngine e;
  EXPECT_TRUE(e.scalar_check(W("X [t] X* X [t^2] X*")));
  EXPECT_TRUE(e.scalar_check(W("X [1] X*")));
  EXPECT_EQ(e.expectation(W("X [1] X*")).value, F("1"));
  EXPECT_THROW(e.scalar_check(W("(X* X)^4")), ContractError);
  EXPECT_THROW(e.scalar_check(W("X X* [t] X X*")), ContractError);

  std::mt19937 rng(41);
  for (int n = 1; n <= 4; ++n) {
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<Letter> letters;
      for (int j = 0; j < n; ++j) {
        letters.push_back(Letter::x());
        letters.push_back(Letter::coefficient(random_coeff(rng)));
        letters.push_back(Letter::xstar());
      }
      EXPECT_TRUE(e.scalar_check(Word(letters)));
    }
  }
}

TEST(Moments, NonRDiagonality) {
  MomentEngine e;
  EXPECT_FALSE(e.expectation(W("(X* X)^4")).value.is_constant());
  EXPECT_TRUE(e.expectation(W("(X X*)^4")).value.is_constant());
}

TEST(Moments, Guards) {
  MomentEngine e;
  EXPECT_THROW(e.expectation(W("(X* X)^9")), ResourceLimitError);
  MomentOptions wide;
  wide.letter_guard = 18;
  MomentEngine big(wide);
  try {
    big.expectation(W("(X* X)^9"));
    FAIL();
  } catch (const ResourceLimitError& e) {
    EXPECT_NE(std::string(e.what()).find("21147"), std::string::npos) << e.what();
  }
}

TEST(Moments, TracialityUnderRotation) {
  std::mt19937 rng(5);
  MomentEngine e;
  for (int n = 2; n <= 8; n += 2) {
    for (bool first_star : {false, true}) {
      const auto pairs = random_pairs(rng, alternating_pattern(n, first_star));
      const Rational base = e.trace_moment(build(pairs));
      for (int r = 1; r < n; ++r) {
        Pairs rotated(pairs.begin() + r, pairs.end());
        rotated.insert(rotated.end(), pairs.begin(), pairs.begin() + r);
        EXPECT_EQ(e.trace_moment(build(rotated)), base) << "n=" << n << " r=" << r;
      }
    }
  }
}

TEST(Moments, OddAlternatingVanish) {
  std::mt19937 rng(6);
  MomentEngine e;
  for (int n = 1; n <= 7; n += 2)
    for (bool first_star : {false, true})
      EXPECT_TRUE(e.expectation(build(random_pairs(rng, alternating_pattern(n, first_star)))).value.is_zero());
}

TEST(Moments, AdjointSymmetry) {
  std::mt19937 rng(7);
  MomentEngine e;
  std::uniform_int_distribution<int> bit(0, 1);
  for (int n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<bool> pattern;
      for (int i = 0; i < n; ++i) pattern.push_back(bit(rng) == 1);
      auto pairs = random_pairs(rng, pattern);
      const Word w = build(pairs) * Word::coefficient(random_coeff(rng));
      EXPECT_EQ(e.trace_moment(w.adjoint()), e.trace_moment(w)) << w.to_string();
    }
  }
}

TEST(Moments, CentredProductVanishes) {
  // The defining relation: E of the centred product over the maximal alternating blocks is 0.
  std::mt19937 rng(8);
  MomentEngine e;
  const std::vector<std::vector<bool>> patterns{{false, false}, {true, false, false, true}, {false, false, true, true, false}};
  for (const auto& pattern : patterns) {
    const auto pairs = random_pairs(rng, pattern);
    const auto sigma = max_alternating_interval_partition(StarPattern{pattern});
    WordSum product = WordSum::of(Word());
    for (const auto& block : sigma.blocks()) {
      Pairs part;
      for (int j : block) part.push_back(pairs[static_cast<std::size_t>(j - 1)]);
      const Word piece = build(part);
      const auto c = e.expectation(piece).value;
      WordSum centred = WordSum::of(piece);
      centred += WordSum{{{Rational(-1), Word::coefficient(c)}}};
      product = product * centred;
    }
    EXPECT_TRUE(e.expectation(product).value.is_zero());
  }
}
