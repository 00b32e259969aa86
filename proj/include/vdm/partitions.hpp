#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vdm {

/// Default cap on the ground-set size for exhaustive enumeration (Bell(10) = 115975).
inline constexpr int kDefaultPartitionGuard = 10;

/// A set partition of {1..n} in canonical form: blocks sorted by least element,
/// elements ascending. Immutable once built.
class SetPartition {
 public:
  using Block = std::vector<int>;

  /// Validates that `blocks` is a partition of {1..n} and canonicalises it.
  SetPartition(int n, std::vector<Block> blocks);

  /// Builds from a restricted growth string (labels are 0-based, first label 0).
  static SetPartition from_labels(const std::vector<int>& labels);

  /// 0_n: all singletons.
  static SetPartition finest(int n);
  /// 1_n: a single block.
  static SetPartition coarsest(int n);

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return blocks_.size(); }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

  /// Index into blocks() of the block holding element j (1-based).
  int block_index(int j) const { return labels_.at(static_cast<std::size_t>(j - 1)); }
  const Block& block_of(int j) const { return blocks_[static_cast<std::size_t>(block_index(j))]; }
  bool same_block(int a, int b) const { return block_index(a) == block_index(b); }

  /// Restricted growth string, one 0-based label per element.
  const std::vector<int>& labels() const noexcept { return labels_; }

  bool is_finest() const noexcept { return static_cast<int>(blocks_.size()) == n_; }
  bool is_coarsest() const noexcept { return blocks_.size() == 1; }

  /// True if `elements` is a union of blocks.
  bool splits(const std::set<int>& elements) const;
  /// True if the interval {first..last} is a union of blocks.
  bool splits_interval(int first, int last) const;

  /// Text form "{1,3|2,4}".
  std::string to_string() const;

  friend bool operator==(const SetPartition& a, const SetPartition& b) {
    return a.n_ == b.n_ && a.labels_ == b.labels_;
  }
  friend bool operator<(const SetPartition& a, const SetPartition& b) {
    return a.n_ != b.n_ ? a.n_ < b.n_ : a.labels_ < b.labels_;
  }

 private:
  SetPartition() = default;

  int n_ = 0;
  std::vector<Block> blocks_;
  std::vector<int> labels_;
};

/// Parses the "{1,3|2,4}" text form.
SetPartition parse_partition(std::string_view text);

/// A word over {1, *}; `star[i]` is true when position i+1 carries *.
struct StarPattern {
  std::vector<bool> star;

  int n() const noexcept { return static_cast<int>(star.size()); }
  bool alternating() const;
  std::string to_string() const;

  friend bool operator==(const StarPattern&, const StarPattern&) = default;
};

/// Parses strings such as "1*1*" (whitespace ignored).
StarPattern parse_star_pattern(std::string_view text);

/// J_pi and I_pi(p) for p = 1..n.
struct PartitionGeometry {
  SetPartition pi;
  std::set<int> j_set;
  std::map<int, std::set<int>> i_sets;

  const std::set<int>& I(int p) const { return i_sets.at(p); }
};

struct Classification {
  bool noncrossing = true;
  bool purely_crossing = false;
  /// A proper subinterval {first..last} splitting the partition, if any.
  std::optional<std::pair<int, int>> splits_interval;
};

/// All Bell(n) partitions in restricted-growth-string lexicographic order.
std::vector<SetPartition> enumerate_partitions(int n, int guard = kDefaultPartitionGuard);

/// Calls `visit` on each partition of {1..n} in the same order as enumerate_partitions.
void for_each_partition(int n, const std::function<void(const SetPartition&)>& visit,
                        int guard = kDefaultPartitionGuard);

std::vector<SetPartition> enumerate_noncrossing(int n, int guard = kDefaultPartitionGuard);

SetPartition join(const SetPartition& a, const SetPartition& b);

/// Image under j -> j-1 (mod n), so 1 -> n.
SetPartition rotate_left(const SetPartition& p);
SetPartition rotate_left(const SetPartition& p, int times);

/// {S ∩ keep} without empties, relabelled order-preservingly onto {1..|keep|}.
SetPartition restrict(const SetPartition& p, const std::set<int>& keep);

/// Merges k+1 into k's block and relabels onto {1..n-1}. Requires k ~ k+1.
SetPartition glue(const SetPartition& p, int k);

/// p ⊕ q: q shifted right by p.n().
SetPartition direct_sum(const SetPartition& p, const SetPartition& q);

bool is_noncrossing(const SetPartition& p);
Classification classify(const SetPartition& p);

std::vector<SetPartition> enumerate_purely_crossing(int n, int guard = kDefaultPartitionGuard);

SetPartition max_alternating_interval_partition(const StarPattern& eps);

PartitionGeometry geometry(const SetPartition& p);

/// Bell numbers for small n (exact up to n = 25).
unsigned long long bell_number(int n);

}  // namespace vdm

template <>
struct std::hash<vdm::SetPartition> {
  std::size_t operator()(const vdm::SetPartition& p) const noexcept {
    std::size_t h = static_cast<std::size_t>(p.n());
    for (int label : p.labels()) h = h * 31 + static_cast<std::size_t>(label);
    return h;
  }
};
