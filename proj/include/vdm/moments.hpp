#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "vdm/lambda.hpp"
#include "vdm/word.hpp"

namespace vdm {

struct MomentOptions {
  /// Largest n for which a sum over all partitions of {1..n} is attempted.
  int partition_guard = 8;
  /// Largest number of matrix letters accepted in a top-level word.
  int letter_guard = 16;
};

struct DerivationStats {
  std::size_t words_evaluated = 0;
  std::size_t memo_hits = 0;
  std::size_t partitions_summed = 0;
  std::size_t max_depth = 0;
};

struct MomentResult {
  PiecewisePoly value;
  DerivationStats stats;
};

/// The C[0,1]-valued expectation E on words in X, X* and coefficients.
class MomentEngine {
 public:
  explicit MomentEngine(MomentOptions options = {}, LambdaCache* cache = nullptr);

  /// Closed form for strictly alternating words of even length.
  PiecewisePoly alternating_even_moment(const Word& w);
  MomentResult expectation(const Word& w);
  MomentResult expectation(const WordSum& s);
  Rational trace_moment(const Word& w);
  Rational trace_moment(const WordSum& s);
  /// E(w)(t) for an alternating word of even length.
  Rational diagonal_limit(const Word& w, const Rational& t);
  /// True when E(X b_1 X* X b_2 X* ... X b_n X*) is a constant.
  bool scalar_check(const Word& w);

  LambdaEngine& lambda() noexcept { return lambda_; }
  const MomentOptions& options() const noexcept { return options_; }

 private:
  struct Normal {
    std::vector<bool> star;
    std::vector<PiecewisePoly> inner;  // inner[k] sits between matrix letters k and k+1
    PiecewisePoly lead = PiecewisePoly::one();
    PiecewisePoly trail = PiecewisePoly::one();
    Rational scale{1};
  };

  Normal normal_form(const Word& w) const;
  void check_letters(const Word& w) const;
  PiecewisePoly eval_word(const Word& w, std::size_t depth);
  PiecewisePoly eval_core(const std::vector<bool>& star, const std::vector<PiecewisePoly>& inner, std::size_t depth);
  PiecewisePoly alternating(const std::vector<bool>& star, const std::vector<PiecewisePoly>& inner);

  MomentOptions options_;
  LambdaEngine lambda_;
  DerivationStats stats_;
  std::unordered_map<std::string, PiecewisePoly> memo_;
};

}  // namespace vdm
