#include "vdm/lambda.hpp"

#include <fstream>
#include <set>

#include "vdm/error.hpp"

namespace vdm {

namespace {

void check_arity(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw ArgumentError(std::string(what) + " expects " + std::to_string(want) + " functions, got " +
                        std::to_string(got));
  }
}

std::vector<Rational> indicator(const std::set<int>& I, const std::vector<int>& J, std::size_t width) {
  std::vector<Rational> a(width);
  for (std::size_t k = 0; k < J.size(); ++k)
    if (I.count(J[k])) a[k] = 1;
  return a;
}

struct Factor {
  const PiecewisePoly* g;
  AffineForm arg;
};

/// Integral over `poly` of scale * prod g_k(arg_k(x)), splitting along the pieces of each g_k.
class FactorIntegrator {
 public:
  FactorIntegrator(Rational scale, const std::vector<Factor>& factors) : scale_(std::move(scale)), factors_(factors) {}

  Rational run(const RationalPolytope& poly) { return step(poly, 0); }

 private:
  Rational step(const RationalPolytope& poly, std::size_t idx) {
    if (idx == factors_.size()) {
      ProductIntegrand f;
      f.scale = scale_;
      f.factors = chosen_;
      return integrate(poly, f);
    }
    const auto& fac = factors_[idx];
    const auto& g = *fac.g;
    if (g.piece_count() == 1) {
      chosen_.emplace_back(g.pieces().front(), fac.arg);
      Rational r = step(poly, idx + 1);
      chosen_.pop_back();
      return r;
    }
    Rational sum;
    const auto& bps = g.breakpoints();
    for (std::size_t i = 0; i < g.piece_count(); ++i) {
      if (g.pieces()[i].is_zero()) continue;
      RationalPolytope slab = poly;
      slab.add_range(fac.arg.coeffs, bps[i] - fac.arg.constant, bps[i + 1] - fac.arg.constant);
      chosen_.emplace_back(g.pieces()[i], fac.arg);
      sum += step(slab, idx + 1);
      chosen_.pop_back();
    }
    return sum;
  }

  Rational scale_;
  const std::vector<Factor>& factors_;
  std::vector<std::pair<Polynomial, AffineForm>> chosen_;
};

std::string memo_key(const SetPartition& p, std::span<const PiecewisePoly> gs) {
  std::string key = p.to_string();
  for (const auto& g : gs) {
    key += ';';
    key += g.canonical_key();
  }
  return key;
}

/// Pulls constant factors out of a multilinear argument list; false if some g is zero.
bool normalize_constants(std::vector<PiecewisePoly>& gs, Rational& scale) {
  for (auto& g : gs) {
    if (g.is_zero()) return false;
    if (g.is_constant() && !g.is_one()) {
      scale *= g.constant_value();
      g = PiecewisePoly::one();
    }
  }
  return true;
}

std::vector<PiecewisePoly> slice(const std::vector<PiecewisePoly>& gs, int from, int to) {
  if (to <= from) return {};
  return {gs.begin() + from, gs.begin() + to};
}

std::set<int> range_set(int first, int last) {
  std::set<int> s;
  for (int j = first; j <= last; ++j) s.insert(j);
  return s;
}

}  // namespace

std::string to_string(Provenance p) { return p == Provenance::reduced ? "reduced" : "interpolated"; }

PiecewisePoly gamma(const SetPartition& p, std::span<const PiecewisePoly> gs) {
  check_arity(gs.size(), static_cast<std::size_t>(p.n()), "Gamma");
  PiecewisePoly head = PiecewisePoly::one();
  Rational scalar(1);
  for (const auto& block : p.blocks()) {
    PiecewisePoly prod = PiecewisePoly::one();
    for (int j : block) prod *= gs[static_cast<std::size_t>(j - 1)];
    if (block.front() == 1) {
      head = std::move(prod);
    } else {
      scalar *= prod.tau();
    }
  }
  return head * scalar;
}

Rational lambda_eval_at(const SetPartition& p, std::span<const PiecewisePoly> gs, const Rational& t) {
  const int n = p.n();
  check_arity(gs.size(), static_cast<std::size_t>(n - 1), "Lambda");
  if (t < 0 || t > 1) throw ArgumentError("t must lie in [0,1], got " + to_string(t));
  const auto geo = geometry(p);
  const std::vector<int> J(geo.j_set.begin(), geo.j_set.end());
  Rational scale(1);
  RationalPolytope poly(static_cast<int>(J.size()));
  std::vector<Factor> factors;
  for (int q = 1; q < n; ++q) {
    const auto& g = gs[static_cast<std::size_t>(q - 1)];
    const auto& I = geo.I(q);
    if (I.empty()) {
      scale *= g.eval_at(t);
      continue;
    }
    auto a = indicator(I, J, J.size());
    poly.add_range(a, -t, 1 - t);
    factors.push_back(Factor{&g, AffineForm{std::move(a), t}});
  }
  if (sgn(scale) == 0) return Rational(0);
  if (J.empty()) return scale;
  return FactorIntegrator(scale, factors).run(poly);
}

Rational tau_lambda_direct(const SetPartition& p, std::span<const PiecewisePoly> gs, const PiecewisePoly& gn) {
  const int n = p.n();
  check_arity(gs.size(), static_cast<std::size_t>(n - 1), "Lambda");
  const auto geo = geometry(p);
  const std::vector<int> J(geo.j_set.begin(), geo.j_set.end());
  const std::size_t d = J.size() + 1;
  std::vector<Rational> et(d);
  et.back() = 1;
  RationalPolytope poly(static_cast<int>(d));
  poly.add_range(et, Rational(0), Rational(1));
  std::vector<Factor> factors;
  for (int q = 1; q < n; ++q) {
    const auto& I = geo.I(q);
    auto a = indicator(I, J, d);
    a.back() = 1;
    if (!I.empty()) poly.add_range(a, Rational(0), Rational(1));
    factors.push_back(Factor{&gs[static_cast<std::size_t>(q - 1)], AffineForm{std::move(a), Rational(0)}});
  }
  factors.push_back(Factor{&gn, AffineForm{et, Rational(0)}});
  return FactorIntegrator(Rational(1), factors).run(poly);
}

int default_degree_bound(const SetPartition& p, std::span<const PiecewisePoly> gs) {
  int d = p.n() - static_cast<int>(p.size());
  for (const auto& g : gs) d += std::max(g.degree(), 0);
  return d;
}

Polynomial lambda_interpolate(const SetPartition& p, std::span<const PiecewisePoly> gs, const Rational& a,
                              const Rational& b, int degree_bound, std::span<const Rational> extra_checks) {
  check_arity(gs.size(), static_cast<std::size_t>(p.n() - 1), "Lambda");
  if (degree_bound < 0) throw ArgumentError("degree bound must be nonnegative");
  if (!(a < b) || a < 0 || b > 1) throw ArgumentError("interpolation interval must satisfy 0 <= a < b <= 1");
  const Rational width = b - a;
  std::vector<std::pair<Rational, Rational>> nodes;
  for (int k = 0; k <= degree_bound; ++k) {
    Rational t = a + width * Rational(2 * k + 1) / Rational(2 * degree_bound + 2);
    nodes.emplace_back(t, lambda_eval_at(p, gs, t));
  }
  Polynomial poly = interpolate(nodes);
  std::vector<Rational> checks{a + width * Rational(3) / Rational(17), a + width * Rational(13) / Rational(19)};
  for (const auto& x : extra_checks)
    if (a < x && x < b) checks.push_back(x);
  for (const auto& x : checks) {
    if (poly(x) != lambda_eval_at(p, gs, x)) {
      throw VerificationError("breakpoint inside interval [" + to_string(a) + "," + to_string(b) + "] for " +
                              p.to_string() + ": interpolant disagrees at t=" + to_string(x));
    }
  }
  return poly;
}

std::vector<Rational> lambda_breakpoint_candidates(const SetPartition& p, std::span<const PiecewisePoly> gs) {
  const int n = p.n();
  check_arity(gs.size(), static_cast<std::size_t>(n - 1), "Lambda");
  const auto geo = geometry(p);
  const std::vector<int> J(geo.j_set.begin(), geo.j_set.end());
  const int d = static_cast<int>(J.size());
  std::set<Rational> out;
  std::vector<ParametricHalfspace> base;
  std::vector<std::pair<std::vector<Rational>, const PiecewisePoly*>> split;
  for (int q = 1; q < n; ++q) {
    const auto& g = gs[static_cast<std::size_t>(q - 1)];
    const auto& I = geo.I(q);
    if (I.empty()) {
      for (std::size_t i = 1; i + 1 < g.breakpoints().size(); ++i) out.insert(g.breakpoints()[i]);
      continue;
    }
    auto a = indicator(I, J, J.size());
    std::vector<Rational> neg(a);
    for (auto& x : neg) x = -x;
    base.push_back({a, Rational(1), Rational(-1)});
    base.push_back({neg, Rational(0), Rational(1)});
    if (g.piece_count() > 1) split.emplace_back(std::move(a), &g);
  }
  if (d > 0) {
    // One parametric cell per combination of pieces.
    std::vector<std::size_t> choice(split.size(), 0);
    while (true) {
      auto rows = base;
      for (std::size_t k = 0; k < split.size(); ++k) {
        const auto& [a, g] = split[k];
        std::vector<Rational> neg(a);
        for (auto& x : neg) x = -x;
        rows.push_back({a, g->breakpoints()[choice[k] + 1], Rational(-1)});
        rows.push_back({neg, -g->breakpoints()[choice[k]], Rational(1)});
      }
      for (auto& s : critical_parameters(d, rows, Rational(0), Rational(1))) out.insert(std::move(s));
      std::size_t k = 0;
      while (k < split.size() && ++choice[k] == split[k].second->piece_count()) choice[k++] = 0;
      if (k == split.size()) break;
    }
  }
  return {out.begin(), out.end()};
}

LambdaCache::LambdaCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto rec = nlohmann::json::parse(line);
      const auto key = rec.at("key").get<std::string>();
      const auto kind = rec.at("kind").get<std::string>();
      rec.at("engine").get<std::string>();
      if (rec.at("version").get<int>() != kVersion) throw ParseError("unsupported cache version", 0);
      const auto& payload = rec.at("payload");
      if (kind == "function") {
        PiecewisePoly::from_json(payload);
      } else if (kind == "point" || kind == "tau") {
        parse_rational(payload.get<std::string>());
      } else {
        throw ParseError("unknown record kind " + kind, 0);
      }
      entries_[key] = std::move(rec);
    } catch (const std::exception& e) {
      warnings_.push_back("discarding corrupt cache line " + std::to_string(lineno) + " in " + path_.string() + ": " +
                          e.what());
    }
  }
}

std::optional<nlohmann::json> LambdaCache::lookup(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return std::optional<nlohmann::json>(std::in_place, it->second.at("payload"));
}

void LambdaCache::store(const std::string& key, const std::string& kind, const nlohmann::json& payload,
                        const std::string& engine) {
  std::lock_guard lock(mutex_);
  if (entries_.count(key)) return;
  nlohmann::json rec{{"key", key}, {"kind", kind}, {"payload", payload}, {"engine", engine}, {"version", kVersion}};
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("cannot write cache file " + path_.string());
  out << rec.dump() << '\n';
  entries_.emplace(key, std::move(rec));
}

std::size_t LambdaCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void LambdaCache::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
  std::filesystem::remove(path_);
}

std::string LambdaCache::make_key(const SetPartition& p, std::span<const PiecewisePoly> gs, const std::string& tag) {
  std::string canon;
  for (const auto& g : gs) {
    canon += g.canonical_key();
    canon += ';';
  }
  return p.to_string() + "/" + hex64(fnv1a64(canon)) + "/" + tag;
}

LambdaEngine::Entry LambdaEngine::reduce(const SetPartition& p, std::vector<PiecewisePoly> gs, bool strict) {
  check_arity(gs.size(), static_cast<std::size_t>(p.n() - 1), "Lambda");
  if (p.n() == 1) return Entry{PiecewisePoly::one(), false};
  Rational scale(1);
  if (!normalize_constants(gs, scale)) return Entry{PiecewisePoly(), false};
  auto& memo = strict ? strict_memo_ : hybrid_memo_;
  const auto key = memo_key(p, gs);
  Entry e;
  if (auto it = memo.find(key); it != memo.end()) {
    ++stats_.memo_hits;
    e = it->second;
  } else {
    e = reduce_normalized(p, gs, strict);
    memo.emplace(key, e);
  }
  if (e.f && scale != 1) *e.f *= scale;
  return e;
}

LambdaEngine::Entry LambdaEngine::reduce_normalized(const SetPartition& p, const std::vector<PiecewisePoly>& gs,
                                                    bool strict) {
  const int n = p.n();
  if (p.is_finest()) {
    PiecewisePoly prod = PiecewisePoly::one();
    for (const auto& g : gs) prod *= g;
    return Entry{std::move(prod), false};
  }
  if (p.is_coarsest()) {
    Rational prod(1);
    for (const auto& g : gs) prod *= g.tau();
    return Entry{PiecewisePoly::constant(prod), false};
  }

  // Adjacent elements in one block.
  for (int k = 1; k < n; ++k) {
    if (!p.same_block(k, k + 1)) continue;
    auto rest = gs;
    rest.erase(rest.begin() + (k - 1));
    Entry e = reduce(glue(p, k), std::move(rest), strict);
    if (e.f) *e.f *= gs[static_cast<std::size_t>(k - 1)].tau();
    return e;
  }

  // 1 and n in one block: a constant.
  if (p.same_block(1, n)) {
    const auto sub = restrict(p, range_set(1, n - 1));
    auto head = slice(gs, 0, n - 2);
    if (strict) {
      Entry e = reduce(sub, std::move(head), true);
      if (!e.f) return e;
      return Entry{PiecewisePoly::constant((*e.f * gs.back()).tau()), e.interpolated};
    }
    return Entry{PiecewisePoly::constant(tau_impl(sub, std::move(head), gs.back())), false};
  }

  // Split along {1..x} and {x+1..n}.
  for (int x = 1; x < n; ++x) {
    if (!p.splits_interval(1, x)) continue;
    Entry left = reduce(restrict(p, range_set(1, x)), slice(gs, 0, x - 1), strict);
    if (!left.f) return left;
    Entry right = reduce(restrict(p, range_set(x + 1, n)), slice(gs, x, n - 1), strict);
    if (!right.f) return right;
    return Entry{*left.f * gs[static_cast<std::size_t>(x - 1)] * *right.f, left.interpolated || right.interpolated};
  }

  // Innermost internal interval {x+1..x+y}.
  for (int y = 1; y <= n - 2; ++y) {
    for (int x = 1; x + y <= n - 1; ++x) {
      if (!p.splits_interval(x + 1, x + y)) continue;
      const auto inner_set = range_set(x + 1, x + y);
      std::set<int> outer_set;
      for (int j = 1; j <= n; ++j)
        if (!inner_set.count(j)) outer_set.insert(j);
      Entry inner = reduce(restrict(p, inner_set), slice(gs, x, x + y - 1), strict);
      if (!inner.f) return inner;
      auto outer_gs = slice(gs, 0, x - 1);
      outer_gs.push_back(gs[static_cast<std::size_t>(x - 1)] * *inner.f * gs[static_cast<std::size_t>(x + y - 1)]);
      for (auto& g : slice(gs, x + y, n - 1)) outer_gs.push_back(std::move(g));
      Entry outer = reduce(restrict(p, outer_set), std::move(outer_gs), strict);
      if (!outer.f) return outer;
      outer.interpolated = outer.interpolated || inner.interpolated;
      return outer;
    }
  }

  if (strict) return Entry{std::nullopt, false};

  const auto cache_key = LambdaCache::make_key(p, gs, "fn");
  if (cache_) {
    if (auto hit = cache_->lookup(cache_key)) {
      ++stats_.cache_hits;
      return Entry{PiecewisePoly::from_json(*hit), true};
    }
  }
  PiecewisePoly f = interpolate_core(p, gs);
  ++stats_.interpolated_cores;
  if (cache_) cache_->store(cache_key, "function", f.to_json(), "interpolated");
  return Entry{std::move(f), true};
}

PiecewisePoly LambdaEngine::interpolate_core(const SetPartition& p, const std::vector<PiecewisePoly>& gs) {
  const int degree = default_degree_bound(p, gs);
  const auto candidates = lambda_breakpoint_candidates(p, gs);
  std::vector<Rational> bps{Rational(0)};
  std::vector<Polynomial> pieces;

  auto fit = [&](auto&& self, const Rational& a, const Rational& b, int depth) -> void {
    std::vector<Rational> inside;
    for (const auto& c : candidates)
      if (a < c && c < b) inside.push_back(c);
    std::vector<Rational> extra;
    if (!inside.empty()) {
      Rational prev = a;
      for (const auto& c : inside) {
        extra.push_back((prev + c) / 2);
        prev = c;
      }
      extra.push_back((prev + b) / 2);
    }
    try {
      pieces.push_back(lambda_interpolate(p, gs, a, b, degree, extra));
      bps.push_back(b);
    } catch (const VerificationError&) {
      if (depth >= max_bisection_depth) throw;
      const Rational mid = (a + b) / 2;
      Rational split = mid;
      if (!inside.empty()) {
        split = inside.front();
        for (const auto& c : inside)
          if (abs(c - mid) < abs(split - mid)) split = c;
      }
      self(self, a, split, depth + 1);
      self(self, split, b, depth + 1);
    }
  };
  fit(fit, Rational(0), Rational(1), 0);
  return PiecewisePoly(std::move(bps), std::move(pieces));
}

Rational LambdaEngine::tau_impl(const SetPartition& p, std::vector<PiecewisePoly> gs, PiecewisePoly gn) {
  check_arity(gs.size(), static_cast<std::size_t>(p.n() - 1), "Lambda");
  Rational scale(1);
  std::vector<PiecewisePoly> all = std::move(gs);
  all.push_back(std::move(gn));
  if (!normalize_constants(all, scale)) return Rational(0);
  const auto key = memo_key(p, all);
  if (auto it = tau_memo_.find(key); it != tau_memo_.end()) {
    ++stats_.memo_hits;
    return scale * it->second;
  }
  PiecewisePoly last = all.back();
  all.pop_back();
  Rational value;
  Entry e = reduce(p, all, true);
  if (e.f) {
    value = (*e.f * last).tau();
  } else {
    all.push_back(last);
    const auto cache_key = LambdaCache::make_key(p, all, "tau");
    all.pop_back();
    std::optional<nlohmann::json> hit;
    if (cache_) hit = cache_->lookup(cache_key);
    if (hit) {
      ++stats_.cache_hits;
      value = parse_rational(hit->get<std::string>());
    } else {
      value = tau_lambda_direct(p, all, last);
      ++stats_.direct_integrals;
      if (cache_) cache_->store(cache_key, "tau", to_string(value), "direct");
    }
  }
  tau_memo_.emplace(key, value);
  return scale * value;
}

FunctionValue LambdaEngine::function(const SetPartition& p, std::span<const PiecewisePoly> gs) {
  Entry e = reduce(p, {gs.begin(), gs.end()}, false);
  return FunctionValue{*e.f, e.interpolated ? Provenance::interpolated : Provenance::reduced};
}

Rational LambdaEngine::tau(const SetPartition& p, std::span<const PiecewisePoly> gs, const PiecewisePoly& gn) {
  const Rational value = tau_impl(p, {gs.begin(), gs.end()}, gn);
#ifndef NDEBUG
  if (p.n() >= 2) {
    std::vector<PiecewisePoly> rotated(gs.begin() + 1, gs.end());
    rotated.push_back(gn);
    if (tau_impl(rotate_left(p), std::move(rotated), gs.front()) != value) {
      throw ContractError("rotation identity violated for " + p.to_string());
    }
  }
#endif
  return value;
}

Rational LambdaEngine::eval_at(const SetPartition& p, std::span<const PiecewisePoly> gs, const Rational& t) {
  ++stats_.point_evaluations;
  const auto key = LambdaCache::make_key(p, gs, to_string(t));
  if (cache_) {
    if (auto hit = cache_->lookup(key)) {
      ++stats_.cache_hits;
      return parse_rational(hit->get<std::string>());
    }
  }
  Rational v = lambda_eval_at(p, gs, t);
  if (cache_) cache_->store(key, "point", to_string(v), "direct");
  return v;
}

std::optional<PiecewisePoly> lambda_reduce(const SetPartition& p, std::span<const PiecewisePoly> gs) {
  LambdaEngine engine;
  return engine.reduce(p, {gs.begin(), gs.end()}, true).f;
}

Rational tau_lambda(const SetPartition& p, std::span<const PiecewisePoly> gs, const PiecewisePoly& gn) {
  LambdaEngine engine;
  return engine.tau(p, gs, gn);
}

}  // namespace vdm
