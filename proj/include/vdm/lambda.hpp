#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "vdm/funcspace.hpp"
#include "vdm/partitions.hpp"
#include "vdm/polytope.hpp"

namespace vdm {

enum class Provenance { reduced, interpolated };

std::string to_string(Provenance p);

struct PointValue {
  Rational t;
  Rational v;
};

struct FunctionValue {
  PiecewisePoly f;
  Provenance provenance = Provenance::reduced;
};

using LambdaValue = std::variant<PointValue, FunctionValue>;

/// Gamma_pi(g_1..g_n): product over the block of 1 times tau of the other block products.
PiecewisePoly gamma(const SetPartition& p, std::span<const PiecewisePoly> gs);

/// Lambda_pi(g_1..g_{n-1})(t) by exact integration over E(pi, t).
Rational lambda_eval_at(const SetPartition& p, std::span<const PiecewisePoly> gs, const Rational& t);

/// Closed form from the reduction rules; nullopt when a purely crossing core remains.
std::optional<PiecewisePoly> lambda_reduce(const SetPartition& p, std::span<const PiecewisePoly> gs);

/// |J_pi| + sum of the degrees of the g's.
int default_degree_bound(const SetPartition& p, std::span<const PiecewisePoly> gs);

/// Interpolates Lambda on [a, b] from degree_bound + 1 interior samples and checks two more
/// (plus any extra points given). Throws VerificationError when the checks disagree.
Polynomial lambda_interpolate(const SetPartition& p, std::span<const PiecewisePoly> gs, const Rational& a,
                              const Rational& b, int degree_bound, std::span<const Rational> extra_checks = {});

/// Values of t in (0,1) where Lambda_pi(gs) may change polynomial piece.
std::vector<Rational> lambda_breakpoint_candidates(const SetPartition& p, std::span<const PiecewisePoly> gs);

/// tau(Lambda_pi(g_1..g_{n-1}) g_n) as a single integral over the lifted region in (x, t).
Rational tau_lambda_direct(const SetPartition& p, std::span<const PiecewisePoly> gs, const PiecewisePoly& gn);

/// Content-addressed JSON-lines store of Lambda results.
class LambdaCache {
 public:
  static constexpr int kVersion = 1;

  explicit LambdaCache(std::filesystem::path path);

  const std::filesystem::path& path() const noexcept { return path_; }
  std::optional<nlohmann::json> lookup(const std::string& key) const;
  /// Idempotent: storing an existing key is a no-op.
  void store(const std::string& key, const std::string& kind, const nlohmann::json& payload, const std::string& engine);
  std::size_t size() const;
  /// Problems met while loading (corrupt lines are skipped).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void clear();

  /// Partition text, FNV-1a of the canonical g-list, and the t tag ("fn", "tau", or a rational).
  static std::string make_key(const SetPartition& p, std::span<const PiecewisePoly> gs, const std::string& tag);

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, nlohmann::json> entries_;
  std::vector<std::string> warnings_;
};

/// Lambda engine with memoisation. Reduction rules first; purely crossing cores are
/// reconstructed by verified interpolation (functions) or direct integration (tau values).
class LambdaEngine {
 public:
  struct Stats {
    std::size_t memo_hits = 0;
    std::size_t cache_hits = 0;
    std::size_t interpolated_cores = 0;
    std::size_t direct_integrals = 0;
    std::size_t point_evaluations = 0;
  };

  explicit LambdaEngine(LambdaCache* cache = nullptr) : cache_(cache) {}

  FunctionValue function(const SetPartition& p, std::span<const PiecewisePoly> gs);
  Rational tau(const SetPartition& p, std::span<const PiecewisePoly> gs, const PiecewisePoly& gn);
  Rational eval_at(const SetPartition& p, std::span<const PiecewisePoly> gs, const Rational& t);

  const Stats& stats() const noexcept { return stats_; }
  int max_bisection_depth = 12;

 private:
  struct Entry {
    std::optional<PiecewisePoly> f;
    bool interpolated = false;
  };
  Entry reduce(const SetPartition& p, std::vector<PiecewisePoly> gs, bool strict);
  Entry reduce_normalized(const SetPartition& p, const std::vector<PiecewisePoly>& gs, bool strict);
  PiecewisePoly interpolate_core(const SetPartition& p, const std::vector<PiecewisePoly>& gs);
  Rational tau_impl(const SetPartition& p, std::vector<PiecewisePoly> gs, PiecewisePoly gn);

  LambdaCache* cache_;
  Stats stats_;
  std::unordered_map<std::string, Entry> strict_memo_;
  std::unordered_map<std::string, Entry> hybrid_memo_;
  std::unordered_map<std::string, Rational> tau_memo_;

  friend std::optional<PiecewisePoly> lambda_reduce(const SetPartition&, std::span<const PiecewisePoly>);
};

/// tau(Lambda_pi(g_1..g_{n-1}) g_n) via a fresh engine.
Rational tau_lambda(const SetPartition& p, std::span<const PiecewisePoly> gs, const PiecewisePoly& gn);

}  // namespace vdm
