#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vdm/moments.hpp"

namespace vdm {

/// Arguments of alpha^(pattern)_n: pattern 1 starts with X, pattern 2 with X*.
struct CumulantSpec {
  int n = 1;
  int pattern = 1;
  std::vector<PiecewisePoly> b;  // b_1 .. b_{2n-1}

  /// Throws ArgumentError on a bad pattern or arity, or an order outside 1..8.
  void validate() const;
};

struct ConsistencyRow {
  StarPattern eps;
  std::vector<PiecewisePoly> b;
  /// alpha for alternating patterns of even length, 0 otherwise.
  PiecewisePoly expected;
  PiecewisePoly inversion;
  bool equal = false;
};

/// Largest number of matrix letters the inversion oracle accepts.
inline constexpr int kInversionGuard = 8;

class CumulantEngine {
 public:
  explicit CumulantEngine(MomentEngine& moments) : moments_(moments) {}

  PiecewisePoly alpha(const CumulantSpec& spec);
  /// The sum over purely crossing partitions alone, without the order-8 corrections.
  PiecewisePoly pc_sum(const CumulantSpec& spec);
  /// The four order-8 correction terms, each entering alpha with a minus sign.
  std::array<PiecewisePoly, 4> order8_corrections(const CumulantSpec& spec);

  /// Highest cumulant of pattern eps with b[k] sitting between letters k+1 and k+2,
  /// obtained by inverting the moment-cumulant relation over noncrossing partitions.
  PiecewisePoly cumulant_by_inversion(const StarPattern& eps, std::span<const PiecewisePoly> b);

  /// alpha against the inversion oracle on every pattern of length 1..2*n_max, random b's.
  std::vector<ConsistencyRow> consistency_report(int n_max, std::uint64_t seed);

 private:
  PiecewisePoly nested(const SetPartition& pi, const std::vector<bool>& star, std::span<const PiecewisePoly> b, int l,
                       int r);

  MomentEngine& moments_;
  std::unordered_map<std::string, PiecewisePoly> memo_;
};

}  // namespace vdm
