#include <gtest/gtest.h>

#include <random>

#include "vdm/cumulants.hpp"
#include "vdm/error.hpp"

using namespace vdm;

namespace {

using Polys = std::vector<PiecewisePoly>;

PiecewisePoly F(const char* s) { return parse_function(s); }

PiecewisePoly random_poly(std::mt19937& rng, int max_degree = 1) {
  std::uniform_int_distribution<int> num(-3, 3), den(1, 3);
  std::vector<Rational> c;
  for (int k = 0; k <= max_degree; ++k) {
    Rational r(num(rng), den(rng));
    r.canonicalize();
    c.push_back(r);
  }
  return PiecewisePoly(Polynomial(c));
}

Polys random_list(std::mt19937& rng, int size) {
  Polys out;
  for (int i = 0; i < size; ++i) out.push_back(random_poly(rng));
  return out;
}

StarPattern alternating(int letters, bool star_first) {
  StarPattern eps;
  for (int i = 0; i < letters; ++i) eps.star.push_back(star_first == (i % 2 == 0));
  return eps;
}

struct Fixture : ::testing::Test {
  MomentEngine moments;
  CumulantEngine engine{moments};
};

}  // namespace

using Cumulants = Fixture;

TEST_F(Cumulants, OrderOne) {
  EXPECT_EQ(engine.alpha({1, 1, {F("t")}}), F("1/2"));
  EXPECT_EQ(engine.alpha({1, 2, {F("t")}}), F("1/2"));
  EXPECT_EQ(engine.alpha({1, 1, {F("3*t^2 - 1")}}), F("0"));
}

TEST_F(Cumulants, OrderOneIsLinear) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto b = random_poly(rng, 3), c = random_poly(rng, 3);
    const Rational k(trial - 4);
    for (int pattern : {1, 2}) {
      EXPECT_EQ(engine.alpha({1, pattern, {b + c}}), engine.alpha({1, pattern, {b}}) + engine.alpha({1, pattern, {c}}));
      EXPECT_EQ(engine.alpha({1, pattern, {b * k}}), engine.alpha({1, pattern, {b}}) * k);
    }
  }
}

TEST_F(Cumulants, VanishingOrders) {
  std::mt19937 rng(2);
  for (int n : {2, 3, 5})
    for (int pattern : {1, 2})
      for (int trial = 0; trial < 3; ++trial)
        EXPECT_TRUE(engine.alpha({n, pattern, random_list(rng, 2 * n - 1)}).is_zero()) << n;
}

TEST_F(Cumulants, OrderFour) {
  const Polys ones(7, PiecewisePoly::one());
  EXPECT_EQ(engine.alpha({4, 1, ones}), F("2/3"));
  EXPECT_EQ(engine.alpha({4, 2, ones}), F("1/2 + t - t^2"));
}

TEST_F(Cumulants, ArityAndOrderChecks) {
  EXPECT_THROW(engine.alpha({3, 1, Polys(4, PiecewisePoly::one())}), ArgumentError);
  EXPECT_THROW(engine.alpha({9, 1, Polys(17, PiecewisePoly::one())}), ArgumentError);
  EXPECT_THROW(engine.alpha({0, 1, {}}), ArgumentError);
  EXPECT_THROW(engine.alpha({1, 3, {F("1")}}), ArgumentError);
  EXPECT_THROW(engine.order8_corrections({4, 1, Polys(7, PiecewisePoly::one())}), ArgumentError);
}

TEST_F(Cumulants, InversionExamples) {
  EXPECT_EQ(engine.cumulant_by_inversion(parse_star_pattern("1*"), Polys{F("t")}), F("1/2"));
  EXPECT_EQ(engine.cumulant_by_inversion(parse_star_pattern("11"), Polys{F("t")}), F("0"));
  EXPECT_EQ(engine.cumulant_by_inversion(parse_star_pattern("1*1*"), Polys(3, PiecewisePoly::one())), F("0"));
  EXPECT_EQ(engine.cumulant_by_inversion(parse_star_pattern("1"), Polys{}), F("0"));
  EXPECT_THROW(engine.cumulant_by_inversion(parse_star_pattern("1*"), Polys{}), ArgumentError);
  EXPECT_THROW(engine.cumulant_by_inversion(alternating(10, false), Polys(9, PiecewisePoly::one())),
               ResourceLimitError);
}

TEST_F(Cumulants, InversionMatchesAlpha) {
  std::mt19937 rng(3);
  for (int n = 1; n <= 3; ++n) {
    for (int pattern : {1, 2}) {
      const auto b = random_list(rng, 2 * n - 1);
      EXPECT_EQ(engine.cumulant_by_inversion(alternating(2 * n, pattern == 2), b), engine.alpha({n, pattern, b}))
          << "n=" << n << " pattern=" << pattern;
    }
  }
}

TEST_F(Cumulants, InversionMatchesAlphaAtOrderFour) {
  std::mt19937 rng(4);
  for (int pattern : {1, 2}) {
    const auto b = random_list(rng, 7);
    EXPECT_EQ(engine.cumulant_by_inversion(alternating(8, pattern == 2), b), engine.alpha({4, pattern, b}));
  }
}

TEST_F(Cumulants, MixedPatternsVanish) {
  std::mt19937 rng(5);
  for (int len = 1; len <= 4; ++len) {
    for (unsigned mask = 0; mask < (1u << len); ++mask) {
      StarPattern eps;
      for (int i = 0; i < len; ++i) eps.star.push_back((mask >> i) & 1u);
      if (len % 2 == 0 && eps.alternating()) continue;
      EXPECT_TRUE(engine.cumulant_by_inversion(eps, random_list(rng, len - 1)).is_zero()) << eps.to_string();
    }
  }
}

TEST_F(Cumulants, ConsistencyReport) {
  for (int n_max : {1, 2}) {
    const auto rows = engine.consistency_report(n_max, 11);
    EXPECT_EQ(rows.size(), (std::size_t{1} << (2 * n_max + 1)) - 2);
    for (const auto& row : rows) {
      EXPECT_TRUE(row.equal) << row.eps.to_string();
      if (n_max == 2 && row.eps.n() == 4) EXPECT_TRUE(row.inversion.is_zero());
    }
  }
  EXPECT_THROW(engine.consistency_report(5, 1), ArgumentError);
}

TEST_F(Cumulants, OrderEightCorrectionTerms) {
  std::mt19937 rng(6);
  auto& L = moments.lambda();
  const auto p4 = parse_partition("{1,3|2,4}");
  for (int trial = 0; trial < 2; ++trial) {
    const auto b = random_list(rng, 15);
    auto B = [&](int i) { return b[static_cast<std::size_t>(i - 1)]; };
    auto T = [&](PiecewisePoly x) { return x.tau(); };
    auto TL = [&](int i, int j, int k, int last) { return L.tau(p4, Polys{B(i), B(j), B(k)}, B(last)); };
    auto LF = [&](int i, int j, int k) { return L.function(p4, Polys{B(i), B(j), B(k)}).f; };

    const auto one = engine.order8_corrections({8, 1, b});
    EXPECT_EQ(one[0], T(B(2) * B(6)) * B(4) * B(8) * T(B(10) * B(14)) * B(12) * TL(1, 3, 5, 7) * TL(9, 11, 13, 15));
    EXPECT_EQ(one[1], T(B(2) * B(6) * B(10) * B(14)) * B(4) * T(B(8) * B(12)) * TL(1, 3, 5, 15) * TL(7, 9, 11, 13));
    EXPECT_EQ(one[2], T(B(2) * B(14)) * B(4) * B(8) * T(B(6) * B(10)) * B(12) * TL(1, 3, 13, 15) * TL(5, 7, 9, 11));
    EXPECT_EQ(one[3], T(B(2) * B(6) * B(10) * B(14)) * T(B(4) * B(8)) * B(12) * TL(1, 11, 13, 15) * TL(3, 5, 7, 9));

    const auto two = engine.order8_corrections({8, 2, b});
    EXPECT_EQ(two[0], T(B(1) * B(5) * B(9) * B(13)) * T(B(3) * B(7)) * T(B(11) * B(15)) * TL(2, 4, 6, 8) *
                          LF(10, 12, 14));
    EXPECT_EQ(two[1], T(B(1) * B(13)) * T(B(3) * B(7) * B(11) * B(15)) * T(B(5) * B(9)) * LF(2, 12, 14) *
                          TL(4, 6, 8, 10));
    EXPECT_EQ(two[2], T(B(1) * B(5) * B(9) * B(13)) * T(B(3) * B(15)) * T(B(7) * B(11)) * LF(2, 4, 14) *
                          TL(6, 8, 10, 12));
    EXPECT_EQ(two[3], T(B(1) * B(5)) * T(B(3) * B(7) * B(11) * B(15)) * T(B(9) * B(13)) * LF(2, 4, 6) *
                          TL(8, 10, 12, 14));
  }
}

TEST_F(Cumulants, OrderEightWithUnitCoefficients) {
  const Polys ones(15, PiecewisePoly::one());
  for (int pattern : {1, 2}) {
    const CumulantSpec spec{8, pattern, ones};
    PiecewisePoly total;
    for (const auto& c : engine.order8_corrections(spec)) total += c;
    EXPECT_EQ(engine.pc_sum(spec) - engine.alpha(spec), total);
    EXPECT_EQ(total, pattern == 1 ? F("16/9") : F("4/3 + 8/3*t - 8/3*t^2"));
  }
}
