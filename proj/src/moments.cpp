#include "vdm/moments.hpp"

#include <algorithm>

#include "vdm/error.hpp"

namespace vdm {

namespace {

bool is_alternating(const std::vector<bool>& star) {
  for (std::size_t i = 1; i < star.size(); ++i)
    if (star[i] == star[i - 1]) return false;
  return true;
}

std::string core_key(const std::vector<bool>& star, const std::vector<PiecewisePoly>& inner) {
  std::string key;
  for (bool s : star) key += s ? '*' : '1';
  for (const auto& g : inner) {
    key += ';';
    key += g.canonical_key();
  }
  return key;
}

std::vector<Letter> block_letters(const std::vector<bool>& star, const std::vector<PiecewisePoly>& inner, int first,
                                  int last) {
  std::vector<Letter> out;
  for (int j = first; j <= last; ++j) {
    if (j > first) out.push_back(Letter::coefficient(inner[static_cast<std::size_t>(j - 1)]));
    out.push_back(star[static_cast<std::size_t>(j)] ? Letter::xstar() : Letter::x());
  }
  return out;
}

DerivationStats difference(const DerivationStats& after, const DerivationStats& before) {
  return DerivationStats{after.words_evaluated - before.words_evaluated, after.memo_hits - before.memo_hits,
                         after.partitions_summed - before.partitions_summed, after.max_depth};
}

}  // namespace

MomentEngine::MomentEngine(MomentOptions options, LambdaCache* cache) : options_(options), lambda_(cache) {}

MomentEngine::Normal MomentEngine::normal_form(const Word& w) const {
  Normal out;
  PiecewisePoly pending = PiecewisePoly::one();
  for (const auto& l : w.letters()) {
    if (!l.is_matrix()) {
      pending *= l.coeff;
      continue;
    }
    (out.star.empty() ? out.lead : out.inner.emplace_back()) = pending;
    pending = PiecewisePoly::one();
    out.star.push_back(l.kind == LetterKind::Xstar);
  }
  (out.star.empty() ? out.lead : out.trail) = pending;
  for (auto& g : out.inner) {
    if (g.is_constant() && !g.is_one()) {
      out.scale *= g.constant_value();
      g = PiecewisePoly::one();
    }
  }
  return out;
}

void MomentEngine::check_letters(const Word& w) const {
  const int letters = w.matrix_letters();
  if (letters > options_.letter_guard) {
    throw ResourceLimitError("word has " + std::to_string(letters) + " matrix letters; the guard is " +
                             std::to_string(options_.letter_guard) + " (raise it with --guard-override)");
  }
}

PiecewisePoly MomentEngine::eval_word(const Word& w, std::size_t depth) {
  if (w.is_zero()) return PiecewisePoly();
  Normal nf = normal_form(w);
  if (nf.star.empty()) return nf.lead * nf.scale;
  if (sgn(nf.scale) == 0) return PiecewisePoly();
  PiecewisePoly core = eval_core(nf.star, nf.inner, depth);
  if (core.is_zero()) return core;
  return nf.lead * core * nf.trail * nf.scale;
}

PiecewisePoly MomentEngine::eval_core(const std::vector<bool>& star, const std::vector<PiecewisePoly>& inner,
                                      std::size_t depth) {
  stats_.max_depth = std::max(stats_.max_depth, depth);
  const auto key = core_key(star, inner);
  if (auto it = memo_.find(key); it != memo_.end()) {
    ++stats_.memo_hits;
    return it->second;
  }
  ++stats_.words_evaluated;
  const int n = static_cast<int>(star.size());
  PiecewisePoly value;
  if (is_alternating(star)) {
    if (n % 2 == 0) value = alternating(star, inner);
  } else {
    const auto sigma = max_alternating_interval_partition(StarPattern{star});
    const auto& blocks = sigma.blocks();
    const std::size_t m = blocks.size();
    // Blocks as 0-based letter ranges, with the coefficient in front of each and its moment.
    std::vector<std::pair<int, int>> range(m);
    std::vector<PiecewisePoly> gap(m, PiecewisePoly::one());
    std::vector<PiecewisePoly> centre(m);
    for (std::size_t i = 0; i < m; ++i) {
      range[i] = {blocks[i].front() - 1, blocks[i].back() - 1};
      if (i > 0) gap[i] = inner[static_cast<std::size_t>(range[i].first - 1)];
      const auto [first, last] = range[i];
      std::vector<bool> sub_star(star.begin() + first, star.begin() + last + 1);
      std::vector<PiecewisePoly> sub_inner(inner.begin() + first, inner.begin() + last);
      centre[i] = gap[i] * eval_core(sub_star, sub_inner, depth + 1);
    }
    // The centred product over the blocks has zero expectation; every other term is shorter.
    PiecewisePoly rest;
    const std::size_t full = (std::size_t{1} << m) - 1;
    for (std::size_t mask = 0; mask < full; ++mask) {
      std::vector<Letter> letters;
      for (std::size_t i = 0; i < m; ++i) {
        if (mask & (std::size_t{1} << i)) {
          letters.push_back(Letter::coefficient(gap[i]));
          auto part = block_letters(star, inner, range[i].first, range[i].second);
          letters.insert(letters.end(), part.begin(), part.end());
        } else {
          letters.push_back(Letter::coefficient(centre[i] * Rational(-1)));
        }
      }
      rest += eval_word(Word(std::move(letters)), depth + 1);
    }
    value = rest * Rational(-1);
  }
  memo_.emplace(key, value);
  return value;
}

PiecewisePoly MomentEngine::alternating(const std::vector<bool>& star, const std::vector<PiecewisePoly>& inner) {
  const int k = static_cast<int>(star.size()) / 2;
  const auto partitions = enumerate_partitions(k, options_.partition_guard);
  stats_.partitions_summed += partitions.size();
  auto at = [&](int i) -> const PiecewisePoly& { return inner[static_cast<std::size_t>(i)]; };
  PiecewisePoly sum;
  if (star.front()) {
    // b_1 X* b_2 X ... : sum of Lambda_pi(odd gaps) tau(Gamma_pi(even gaps)).
    std::vector<PiecewisePoly> lam, gam;
    for (int i = 1; i <= 2 * k - 3; i += 2) lam.push_back(at(i));
    for (int i = 0; i <= 2 * k - 2; i += 2) gam.push_back(at(i));
    for (const auto& pi : partitions) {
      const Rational weight = gamma(pi, gam).tau();
      if (sgn(weight) == 0) continue;
      sum += lambda_.function(pi, lam).f * weight;
    }
  } else {
    // b_1 X b_2 X* ... : sum of Gamma_pi(1, odd gaps) tau(Lambda_pi(even gaps) b_2n).
    std::vector<PiecewisePoly> gam{PiecewisePoly::one()}, lam;
    for (int i = 1; i <= 2 * k - 3; i += 2) gam.push_back(at(i));
    for (int i = 0; i <= 2 * k - 4; i += 2) lam.push_back(at(i));
    const PiecewisePoly& last = at(2 * k - 2);
    for (const auto& pi : partitions) {
      const Rational weight = lambda_.tau(pi, lam, last);
      if (sgn(weight) == 0) continue;
      sum += gamma(pi, gam) * weight;
    }
  }
  return sum;
}

PiecewisePoly MomentEngine::alternating_even_moment(const Word& w) {
  if (w.is_zero()) return PiecewisePoly();
  const Normal nf = normal_form(w);
  if (nf.star.empty() || nf.star.size() % 2 != 0 || !is_alternating(nf.star)) {
    throw ContractError("word " + w.to_string() +
                        " is not an alternating word of even length; use the general expectation");
  }
  return nf.lead * alternating(nf.star, nf.inner) * nf.trail * nf.scale;
}

MomentResult MomentEngine::expectation(const Word& w) {
  check_letters(w);
  const DerivationStats before = stats_;
  stats_.max_depth = 0;
  PiecewisePoly value = eval_word(w, 0);
  return MomentResult{std::move(value), difference(stats_, before)};
}

MomentResult MomentEngine::expectation(const WordSum& s) {
  for (const auto& [c, w] : s.terms) check_letters(w);
  const DerivationStats before = stats_;
  stats_.max_depth = 0;
  PiecewisePoly value;
  for (const auto& [c, w] : s.terms) value += eval_word(w, 0) * c;
  return MomentResult{std::move(value), difference(stats_, before)};
}

Rational MomentEngine::trace_moment(const Word& w) { return expectation(w).value.tau(); }

Rational MomentEngine::trace_moment(const WordSum& s) { return expectation(s).value.tau(); }

Rational MomentEngine::diagonal_limit(const Word& w, const Rational& t) {
  const auto eps = w.star_pattern();
  if (w.is_zero() || eps.n() == 0 || eps.n() % 2 != 0 || !eps.alternating()) {
    throw ContractError("diagonal limit needs an alternating word of even length, got " + w.to_string());
  }
  return expectation(w).value.eval_at(t);
}

bool MomentEngine::scalar_check(const Word& w) {
  const auto& letters = w.letters();
  bool ok = !w.is_zero() && w.matrix_letters() > 0;
  int position = 0;
  for (std::size_t i = 0; ok && i < letters.size(); ++i) {
    const auto& l = letters[i];
    if (l.kind == LetterKind::Coeff) {
      // Coefficients may only sit between X and the following X*.
      ok = i > 0 && letters[i - 1].kind == LetterKind::X;
      continue;
    }
    ok = (l.kind == LetterKind::X) == (position % 2 == 0);
    ++position;
  }
  ok = ok && position % 2 == 0;
  if (!ok) throw ContractError("scalar check expects the shape X b1 X* X b2 X* ... X bn X*, got " + w.to_string());
  const auto value = expectation(w).value;
  return value.is_constant();
}

}  // namespace vdm
