#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "vdm/error.hpp"
#include "vdm/lambda.hpp"

using namespace vdm;

namespace {

Rational Q(const char* s) { return parse_rational(s); }
SetPartition P(const char* s) { return parse_partition(s); }
PiecewisePoly F(const char* s) { return parse_function(s); }

Rational frac(long p, long q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

std::vector<PiecewisePoly> ones(int k) { return std::vector<PiecewisePoly>(static_cast<std::size_t>(k), PiecewisePoly::one()); }

PiecewisePoly random_g(std::mt19937& rng, int max_degree = 2) {
  std::uniform_int_distribution<int> c(-3, 3), d(0, max_degree);
  std::vector<Rational> coeffs;
  for (int k = d(rng); k >= 0; --k) coeffs.push_back(frac(c(rng), 1 + k));
  return PiecewisePoly(Polynomial(coeffs));
}

std::vector<PiecewisePoly> random_gs(std::mt19937& rng, int k, int max_degree = 2) {
  std::vector<PiecewisePoly> gs;
  for (int i = 0; i < k; ++i) gs.push_back(random_g(rng, max_degree));
  return gs;
}

Rational random_t(std::mt19937& rng) {
  std::uniform_int_distribution<int> num(0, 97);
  return frac(num(rng), 97);
}

const PiecewisePoly kHat = parse_function("piecewise{ [0,1/2]: 2*t; (1/2,1]: 2 - 2*t }");

}  // namespace

TEST(Gamma, Examples) {
  const auto g = std::vector<PiecewisePoly>{F("t"), F("1 + t"), F("t^2")};
  EXPECT_EQ(gamma(SetPartition::coarsest(3), g), F("t") * F("1 + t") * F("t^2"));
  EXPECT_EQ(gamma(P("{1,2|3}"), g), F("t") * F("1 + t") * Q("1/3"));
  EXPECT_EQ(gamma(P("{1,3|2}"), g), F("t^3") * Q("3/2"));
  EXPECT_THROW(gamma(P("{1,2|3}"), std::vector<PiecewisePoly>{F("t")}), ArgumentError);
  for (int n = 1; n <= 6; ++n)
    for (const auto& p : enumerate_partitions(n)) EXPECT_TRUE(gamma(p, ones(n)).is_one()) << p.to_string();
}

TEST(LambdaEval, Examples) {
  const auto pi4 = P("{1,3|2,4}");
  EXPECT_EQ(lambda_eval_at(pi4, ones(3), Q("1/3")), Q("13/18"));
  const std::vector<PiecewisePoly> g{F("1 + t"), F("t^2"), F("2 - t")};
  for (const auto& t : {Q("0"), Q("1/5"), Q("1")}) {
    EXPECT_EQ(lambda_eval_at(SetPartition::coarsest(4), g, t), tau(g[0]) * tau(g[1]) * tau(g[2]));
  }
  const std::vector<PiecewisePoly> g2{F("1 + t"), F("t^2")};
  EXPECT_EQ(lambda_eval_at(SetPartition::finest(3), g2, Q("2/3")), Q("5/3") * Q("4/9"));
  EXPECT_EQ(lambda_eval_at(SetPartition::finest(1), {}, Q("1/2")), 1);
  EXPECT_THROW(lambda_eval_at(pi4, ones(3), Q("3/2")), ArgumentError);
  EXPECT_THROW(lambda_eval_at(pi4, ones(2), Q("1/2")), ArgumentError);
}

TEST(LambdaEval, PiecewiseArguments) {
  // Lambda of the finest partition is the pointwise product.
  EXPECT_EQ(lambda_eval_at(SetPartition::finest(2), std::vector<PiecewisePoly>{kHat}, Q("3/4")), Q("1/2"));
  // The one-block partition integrates each argument.
  EXPECT_EQ(lambda_eval_at(SetPartition::coarsest(3), std::vector<PiecewisePoly>{kHat, F("t")}, Q("1/3")), Q("1/4"));
}

TEST(LambdaReduce, Examples) {
  for (int n = 1; n <= 6; ++n) {
    for (const auto& p : enumerate_noncrossing(n)) {
      const auto f = lambda_reduce(p, ones(n - 1));
      ASSERT_TRUE(f.has_value()) << p.to_string();
      EXPECT_TRUE(f->is_one()) << p.to_string();
      for (const auto& t : {Q("0"), Q("2/7"), Q("1")}) EXPECT_EQ(lambda_eval_at(p, ones(n - 1), t), 1) << p.to_string();
    }
  }
  const std::vector<PiecewisePoly> g{F("1 + t"), F("t^2 - t")};
  const auto f = lambda_reduce(P("{1,2|3}"), g);
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(*f, g[1] * tau(g[0]));
  for (const auto& t : {Q("0"), Q("1/4"), Q("1/2"), Q("1")}) EXPECT_EQ(f->eval_at(t), lambda_eval_at(P("{1,2|3}"), g, t));
  EXPECT_FALSE(lambda_reduce(P("{1,3|2,4}"), ones(3)).has_value());
}

TEST(LambdaReduce, EngineEquivalence) {
  std::mt19937 rng(21);
  for (int n = 1; n <= 5; ++n) {
    for (const auto& p : enumerate_partitions(n)) {
      const auto gs = random_gs(rng, n - 1);
      const auto f = lambda_reduce(p, gs);
      if (!f) continue;
      for (int k = 0; k < 5; ++k) {
        const Rational t = random_t(rng);
        ASSERT_EQ(f->eval_at(t), lambda_eval_at(p, gs, t)) << p.to_string() << " t=" << to_string(t);
      }
    }
  }
}

TEST(LambdaReduce, GluingFactorization) {
  std::mt19937 rng(4);
  for (int n = 2; n <= 5; ++n) {
    for (const auto& p : enumerate_partitions(n)) {
      for (int k = 1; k < n; ++k) {
        if (!p.same_block(k, k + 1)) continue;
        const auto gs = random_gs(rng, n - 1);
        auto rest = gs;
        rest.erase(rest.begin() + (k - 1));
        const Rational t = random_t(rng);
        EXPECT_EQ(lambda_eval_at(p, gs, t), tau(gs[static_cast<std::size_t>(k - 1)]) * lambda_eval_at(glue(p, k), rest, t))
            << p.to_string() << " k=" << k;
      }
    }
  }
}

TEST(LambdaReduce, IntervalSplit) {
  std::mt19937 rng(8);
  for (int n = 2; n <= 5; ++n) {
    for (int x = 1; x < n; ++x) {
      for (const auto& s1 : enumerate_partitions(x)) {
        for (const auto& s2 : enumerate_partitions(n - x)) {
          const auto p = direct_sum(s1, s2);
          const auto gs = random_gs(rng, n - 1);
          const Rational t = random_t(rng);
          const std::vector<PiecewisePoly> g1(gs.begin(), gs.begin() + (x - 1));
          const std::vector<PiecewisePoly> g2(gs.begin() + x, gs.end());
          EXPECT_EQ(lambda_eval_at(p, gs, t),
                    lambda_eval_at(s1, g1, t) * gs[static_cast<std::size_t>(x - 1)].eval_at(t) * lambda_eval_at(s2, g2, t))
              << p.to_string();
        }
      }
    }
  }
}

TEST(LambdaReduce, WrapAroundIsConstant) {
  std::mt19937 rng(13);
  for (int n = 2; n <= 5; ++n) {
    for (const auto& p : enumerate_partitions(n)) {
      if (!p.same_block(1, n)) continue;
      const auto gs = random_gs(rng, n - 1);
      const auto poly = lambda_interpolate(p, gs, Q("0"), Q("1"), default_degree_bound(p, gs));
      EXPECT_LE(poly.degree(), 0) << p.to_string();
    }
  }
}

TEST(LambdaInterpolate, Examples) {
  const auto pi4 = P("{1,3|2,4}");
  EXPECT_EQ(lambda_interpolate(pi4, ones(3), Q("0"), Q("1"), 2), parse_polynomial("1/2 + t - t^2"));
  const std::vector<PiecewisePoly> g{F("1 + t"), F("t^2"), F("2 - t")};
  EXPECT_EQ(lambda_interpolate(SetPartition::coarsest(4), g, Q("0"), Q("1"), default_degree_bound(SetPartition::coarsest(4), g)),
            Polynomial::constant(tau(g[0]) * tau(g[1]) * tau(g[2])));
  EXPECT_EQ(lambda_interpolate(SetPartition::finest(2), std::vector<PiecewisePoly>{F("t")}, Q("0"), Q("1"), 1),
            Polynomial::t());
  // A kink at 1/2 cannot hide from the verification points.
  EXPECT_THROW(lambda_interpolate(SetPartition::finest(2), std::vector<PiecewisePoly>{kHat}, Q("0"), Q("1"), 1),
               VerificationError);
  EXPECT_THROW(lambda_interpolate(pi4, ones(3), Q("1"), Q("0"), 2), ArgumentError);
}

TEST(LambdaEngine, HybridFunctionsMatchDirectEvaluation) {
  std::mt19937 rng(31);
  LambdaEngine engine;
  const auto pi4 = P("{1,3|2,4}");
  const auto v = engine.function(pi4, ones(3));
  EXPECT_EQ(v.provenance, Provenance::interpolated);
  EXPECT_EQ(v.f, F("1/2 + t - t^2"));
  EXPECT_EQ(engine.function(SetPartition::coarsest(3), ones(2)).provenance, Provenance::reduced);

  for (int n = 4; n <= 6; ++n) {
    for (const auto& p : enumerate_partitions(n)) {
      if (is_noncrossing(p) || (n == 6 && p.labels()[1] != 1)) continue;
      const auto gs = random_gs(rng, n - 1, 1);
      const auto f = engine.function(p, gs).f;
      for (int k = 0; k < 2; ++k) {
        const Rational t = random_t(rng);
        ASSERT_EQ(f.eval_at(t), lambda_eval_at(p, gs, t)) << p.to_string();
      }
    }
  }
}

TEST(LambdaEngine, PiecewiseCore) {
  LambdaEngine engine;
  const auto pi4 = P("{1,3|2,4}");
  const std::vector<PiecewisePoly> gs{kHat, F("1"), F("t")};
  const auto f = engine.function(pi4, gs).f;
  for (int k = 0; k <= 12; ++k) {
    const Rational t = frac(k, 12);
    EXPECT_EQ(f.eval_at(t), lambda_eval_at(pi4, gs, t)) << to_string(t);
  }
  EXPECT_EQ(f.tau(), tau_lambda_direct(pi4, gs, F("1")));
}

TEST(TauLambda, Examples) {
  const auto pi4 = P("{1,3|2,4}");
  EXPECT_EQ(tau_lambda(pi4, ones(3), F("1")), Q("2/3"));
  EXPECT_EQ(tau_lambda_direct(pi4, ones(3), F("1")), Q("2/3"));
  Rational sum;
  for (const auto& p : enumerate_partitions(4)) sum += tau_lambda(p, ones(3), F("1"));
  EXPECT_EQ(sum, Q("44/3"));
  EXPECT_EQ(tau_lambda(SetPartition::finest(1), {}, F("t")), Q("1/2"));
}

TEST(TauLambda, RotationInvariance) {
  std::mt19937 rng(2);
  LambdaEngine engine;
  for (int n = 2; n <= 5; ++n) {
    for (const auto& p : enumerate_partitions(n)) {
      const auto gs = random_gs(rng, n);
      const std::vector<PiecewisePoly> head(gs.begin(), gs.end() - 1);
      const std::vector<PiecewisePoly> rotated(gs.begin() + 1, gs.end());
      const Rational a = tau_lambda_direct(p, head, gs.back());
      EXPECT_EQ(a, tau_lambda_direct(rotate_left(p), rotated, gs.front())) << p.to_string();
      EXPECT_EQ(a, engine.tau(p, head, gs.back())) << p.to_string();
    }
  }
}

TEST(LambdaCache, StoreLookupAndCorruption) {
  const auto dir = std::filesystem::temp_directory_path() / "vdm_cache_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "lambda.jsonl";
  const auto pi4 = P("{1,3|2,4}");
  const std::vector<PiecewisePoly> a{F("t*(1+t)"), F("1"), F("1")};
  const std::vector<PiecewisePoly> b{F("t + t^2"), F("1"), F("1")};
  EXPECT_EQ(LambdaCache::make_key(pi4, a, "fn"), LambdaCache::make_key(pi4, b, "fn"));
  EXPECT_NE(LambdaCache::make_key(pi4, a, "fn"), LambdaCache::make_key(pi4, a, "tau"));
  {
    LambdaCache cache(path);
    EXPECT_FALSE(cache.lookup("missing").has_value());
    LambdaEngine engine(&cache);
    const auto f = engine.function(pi4, a).f;
    EXPECT_EQ(cache.size(), 1u);
    cache.store(LambdaCache::make_key(pi4, a, "fn"), "function", f.to_json(), "interpolated");
    EXPECT_EQ(cache.size(), 1u);
  }
  {
    std::ofstream out(path, std::ios::app);
    out << "{not json\n";
    out << R"({"key":"k","kind":"function","payload":{"breakpoints":["0"]},"engine":"x","version":1})" << '\n';
  }
  LambdaCache reloaded(path);
  EXPECT_EQ(reloaded.warnings().size(), 2u);
  EXPECT_EQ(reloaded.size(), 1u);
  LambdaEngine warm(&reloaded);
  LambdaEngine cold;
  EXPECT_EQ(warm.function(pi4, a).f, cold.function(pi4, a).f);
  EXPECT_EQ(warm.stats().cache_hits, 1u);
  EXPECT_EQ(warm.stats().interpolated_cores, 0u);
  std::filesystem::remove_all(dir);
}
