#include "vdm/cumulants.hpp"

#include <random>

#include "vdm/error.hpp"

namespace vdm {

namespace {

const SetPartition& pi4() {
  static const SetPartition p = parse_partition("{1,3|2,4}");
  return p;
}

std::vector<PiecewisePoly> pick(const std::vector<PiecewisePoly>& b, std::initializer_list<int> idx) {
  std::vector<PiecewisePoly> out;
  for (int i : idx) out.push_back(b[static_cast<std::size_t>(i - 1)]);
  return out;
}

PiecewisePoly product(const std::vector<PiecewisePoly>& b, std::initializer_list<int> idx) {
  PiecewisePoly out = PiecewisePoly::one();
  for (int i : idx) out *= b[static_cast<std::size_t>(i - 1)];
  return out;
}

Rational tr(const std::vector<PiecewisePoly>& b, std::initializer_list<int> idx) { return product(b, idx).tau(); }

Word build_word(const std::vector<bool>& star, std::span<const PiecewisePoly> b) {
  std::vector<Letter> letters;
  for (std::size_t i = 0; i < star.size(); ++i) {
    if (i > 0) letters.push_back(Letter::coefficient(b[i - 1]));
    letters.push_back(star[i] ? Letter::xstar() : Letter::x());
  }
  return Word(std::move(letters));
}

std::string key_of(const std::vector<bool>& star, std::span<const PiecewisePoly> b) {
  std::string key;
  for (bool s : star) key += s ? '*' : '1';
  for (const auto& g : b) key += ";" + g.canonical_key();
  return key;
}

}  // namespace

void CumulantSpec::validate() const {
  if (pattern != 1 && pattern != 2) throw ArgumentError("cumulant pattern must be 1 or 2, got " + std::to_string(pattern));
  if (n < 1) throw ArgumentError("cumulant order must be at least 1");
  if (n > 8) {
    throw ArgumentError("cumulant order " + std::to_string(n) +
                        " is unsupported: no formula is known beyond order 8, where the purely crossing sum "
                        "already needs corrections");
  }
  if (b.size() != static_cast<std::size_t>(2 * n - 1)) {
    throw ArgumentError("order " + std::to_string(n) + " needs " + std::to_string(2 * n - 1) + " coefficients, got " +
                        std::to_string(b.size()));
  }
}

PiecewisePoly CumulantEngine::pc_sum(const CumulantSpec& spec) {
  spec.validate();
  const int n = spec.n;
  if (n == 1) return PiecewisePoly::constant(spec.b[0].tau());
  auto& lambda = moments_.lambda();
  PiecewisePoly sum;
  std::vector<PiecewisePoly> odd, even;
  for (int i = 1; i <= 2 * n - 1; ++i) (i % 2 ? odd : even).push_back(spec.b[static_cast<std::size_t>(i - 1)]);
  for (const auto& pi : enumerate_purely_crossing(n)) {
    if (spec.pattern == 1) {
      std::vector<PiecewisePoly> gam{PiecewisePoly::one()};
      gam.insert(gam.end(), even.begin(), even.end());
      const std::vector<PiecewisePoly> lam(odd.begin(), odd.end() - 1);
      const Rational w = lambda.tau(pi, lam, odd.back());
      if (sgn(w) != 0) sum += gamma(pi, gam) * w;
    } else {
      const Rational w = gamma(pi, odd).tau();
      if (sgn(w) != 0) sum += lambda.function(pi, even).f * w;
    }
  }
  return sum;
}

std::array<PiecewisePoly, 4> CumulantEngine::order8_corrections(const CumulantSpec& spec) {
  spec.validate();
  if (spec.n != 8) throw ArgumentError("correction terms exist only at order 8");
  const auto& b = spec.b;
  auto& L = moments_.lambda();
  const auto& p4 = pi4();
  auto tl = [&](std::initializer_list<int> args, int last) {
    return L.tau(p4, pick(b, args), b[static_cast<std::size_t>(last - 1)]);
  };
  auto lf = [&](std::initializer_list<int> args) { return L.function(p4, pick(b, args)).f; };
  if (spec.pattern == 1) {
    return {
        product(b, {4, 8, 12}) * (tr(b, {2, 6}) * tr(b, {10, 14}) * tl({1, 3, 5}, 7) * tl({9, 11, 13}, 15)),
        product(b, {4}) * (tr(b, {2, 6, 10, 14}) * tr(b, {8, 12}) * tl({1, 3, 5}, 15) * tl({7, 9, 11}, 13)),
        product(b, {4, 8, 12}) * (tr(b, {2, 14}) * tr(b, {6, 10}) * tl({1, 3, 13}, 15) * tl({5, 7, 9}, 11)),
        product(b, {12}) * (tr(b, {2, 6, 10, 14}) * tr(b, {4, 8}) * tl({1, 11, 13}, 15) * tl({3, 5, 7}, 9)),
    };
  }
  return {
      lf({10, 12, 14}) * (tr(b, {1, 5, 9, 13}) * tr(b, {3, 7}) * tr(b, {11, 15}) * tl({2, 4, 6}, 8)),
      lf({2, 12, 14}) * (tr(b, {1, 13}) * tr(b, {3, 7, 11, 15}) * tr(b, {5, 9}) * tl({4, 6, 8}, 10)),
      lf({2, 4, 14}) * (tr(b, {1, 5, 9, 13}) * tr(b, {3, 15}) * tr(b, {7, 11}) * tl({6, 8, 10}, 12)),
      lf({2, 4, 6}) * (tr(b, {1, 5}) * tr(b, {3, 7, 11, 15}) * tr(b, {9, 13}) * tl({8, 10, 12}, 14)),
  };
}

PiecewisePoly CumulantEngine::alpha(const CumulantSpec& spec) {
  PiecewisePoly value = pc_sum(spec);
  if (spec.n == 8)
    for (const auto& c : order8_corrections(spec)) value -= c;
  return value;
}

PiecewisePoly CumulantEngine::cumulant_by_inversion(const StarPattern& eps, std::span<const PiecewisePoly> b) {
  const int n = eps.n();
  if (n < 1) throw ArgumentError("cumulant needs at least one letter");
  if (n > kInversionGuard) {
    throw ResourceLimitError("inversion oracle is limited to " + std::to_string(kInversionGuard) +
                             " letters, got " + std::to_string(n));
  }
  if (b.size() != static_cast<std::size_t>(n - 1)) {
    throw ArgumentError("pattern of length " + std::to_string(n) + " needs " + std::to_string(n - 1) +
                        " coefficients, got " + std::to_string(b.size()));
  }
  const auto key = key_of(eps.star, b);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  PiecewisePoly value = moments_.expectation(build_word(eps.star, b)).value;
  for (const auto& pi : enumerate_noncrossing(n)) {
    if (pi.is_coarsest()) continue;
    value -= nested(pi, eps.star, b, 1, n);
  }
  memo_.emplace(key, value);
  return value;
}

PiecewisePoly CumulantEngine::nested(const SetPartition& pi, const std::vector<bool>& star,
                                     std::span<const PiecewisePoly> b, int l, int r) {
  auto coeff = [&](int j) -> const PiecewisePoly& { return b[static_cast<std::size_t>(j - 1)]; };
  const auto& block = pi.block_of(l);
  std::vector<bool> sub_star;
  std::vector<PiecewisePoly> args;
  for (std::size_t i = 0; i < block.size(); ++i) {
    sub_star.push_back(star[static_cast<std::size_t>(block[i] - 1)]);
    if (i + 1 == block.size()) break;
    const int v = block[i], w = block[i + 1];
    args.push_back(w == v + 1 ? coeff(v) : coeff(v) * nested(pi, star, b, v + 1, w - 1) * coeff(w - 1));
  }
  PiecewisePoly value = cumulant_by_inversion(StarPattern{sub_star}, args);
  if (block.back() < r && !value.is_zero()) value *= coeff(block.back()) * nested(pi, star, b, block.back() + 1, r);
  return value;
}

std::vector<ConsistencyRow> CumulantEngine::consistency_report(int n_max, std::uint64_t seed) {
  if (n_max < 1 || 2 * n_max > kInversionGuard) {
    throw ArgumentError("consistency report order must lie in 1.." + std::to_string(kInversionGuard / 2));
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> num(-4, 4), den(1, 4);
  auto random_b = [&] {
    Rational c0(num(rng), den(rng)), c1(num(rng), den(rng));
    c0.canonicalize();
    c1.canonicalize();
    return PiecewisePoly(Polynomial({c0, c1}));
  };
  std::vector<ConsistencyRow> rows;
  for (int len = 1; len <= 2 * n_max; ++len) {
    for (unsigned mask = 0; mask < (1u << len); ++mask) {
      ConsistencyRow row;
      for (int i = 0; i < len; ++i) row.eps.star.push_back((mask >> i) & 1u);
      for (int i = 0; i + 1 < len; ++i) row.b.push_back(random_b());
      if (len % 2 == 0 && row.eps.alternating()) {
        row.expected = alpha(CumulantSpec{len / 2, row.eps.star.front() ? 2 : 1, row.b});
      }
      row.inversion = cumulant_by_inversion(row.eps, row.b);
      row.equal = row.inversion == row.expected;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace vdm
