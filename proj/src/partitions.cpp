#include "vdm/partitions.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

#include "vdm/error.hpp"

namespace vdm {

SetPartition::SetPartition(int n, std::vector<Block> blocks) : n_(n) {
  if (n < 1) throw ArgumentError("partition ground set must be nonempty, got n=" + std::to_string(n));
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (auto& b : blocks) {
    if (b.empty()) throw ArgumentError("partition blocks must be nonempty");
    std::sort(b.begin(), b.end());
    for (int j : b) {
      if (j < 1 || j > n) throw ArgumentError("element " + std::to_string(j) + " outside {1.." + std::to_string(n) + "}");
      if (seen[static_cast<std::size_t>(j - 1)]++) throw ArgumentError("element " + std::to_string(j) + " appears twice");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw ArgumentError("blocks do not cover {1.." + std::to_string(n) + "}");
  }
  std::sort(blocks.begin(), blocks.end(), [](const Block& a, const Block& b) { return a.front() < b.front(); });
  blocks_ = std::move(blocks);
  labels_.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    for (int j : blocks_[i]) labels_[static_cast<std::size_t>(j - 1)] = static_cast<int>(i);
  }
}

SetPartition SetPartition::from_labels(const std::vector<int>& labels) {
  if (labels.empty()) throw ArgumentError("partition ground set must be nonempty");
  std::map<int, Block> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(static_cast<int>(i) + 1);
  std::vector<Block> blocks;
  blocks.reserve(by_label.size());
  for (auto& [label, block] : by_label) blocks.push_back(std::move(block));
  return SetPartition(static_cast<int>(labels.size()), std::move(blocks));
}

SetPartition SetPartition::finest(int n) {
  std::vector<Block> blocks;
  for (int j = 1; j <= n; ++j) blocks.push_back({j});
  return SetPartition(n, std::move(blocks));
}

SetPartition SetPartition::coarsest(int n) {
  Block b(static_cast<std::size_t>(std::max(n, 0)));
  std::iota(b.begin(), b.end(), 1);
  return SetPartition(n, {b});
}

bool SetPartition::splits(const std::set<int>& elements) const {
  for (int j : elements) {
    for (int k : block_of(j)) {
      if (!elements.count(k)) return false;
    }
  }
  return true;
}

bool SetPartition::splits_interval(int first, int last) const {
  for (int j = first; j <= last; ++j) {
    const Block& b = block_of(j);
    if (b.front() < first || b.back() > last) return false;
  }
  return true;
}

std::string SetPartition::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (i) out += '|';
    for (std::size_t k = 0; k < blocks_[i].size(); ++k) {
      if (k) out += ',';
      out += std::to_string(blocks_[i][k]);
    }
  }
  return out + "}";
}

SetPartition parse_partition(std::string_view text) {
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip();
  if (i >= text.size() || text[i] != '{') throw ParseError("expected '{'", i);
  ++i;
  std::vector<SetPartition::Block> blocks(1);
  int max_element = 0;
  bool expect_number = true;
  for (;;) {
    skip();
    if (i >= text.size()) throw ParseError("unterminated partition", i);
    const char c = text[i];
    if (expect_number) {
      if (!std::isdigit(static_cast<unsigned char>(c))) throw ParseError("expected element", i);
      int value = 0;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        value = value * 10 + (text[i] - '0');
        if (value > 1000000) throw ParseError("element too large", i);
        ++i;
      }
      blocks.back().push_back(value);
      max_element = std::max(max_element, value);
      expect_number = false;
    } else if (c == ',') {
      expect_number = true;
      ++i;
    } else if (c == '|') {
      blocks.emplace_back();
      expect_number = true;
      ++i;
    } else if (c == '}') {
      ++i;
      break;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
  }
  skip();
  if (i != text.size()) throw ParseError("trailing characters after partition", i);
  try {
    return SetPartition(max_element, std::move(blocks));
  } catch (const ArgumentError& e) {
    throw ParseError(e.what(), 0);
  }
}

bool StarPattern::alternating() const {
  for (std::size_t i = 1; i < star.size(); ++i) {
    if (star[i] == star[i - 1]) return false;
  }
  return true;
}

std::string StarPattern::to_string() const {
  std::string s;
  for (bool b : star) s += b ? '*' : '1';
  return s;
}

StarPattern parse_star_pattern(std::string_view text) {
  StarPattern eps;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '1') eps.star.push_back(false);
    else if (c == '*') eps.star.push_back(true);
    else if (!std::isspace(static_cast<unsigned char>(c)) && c != ',') {
      throw ParseError(std::string("star pattern accepts only '1' and '*', got '") + c + "'", i);
    }
  }
  if (eps.star.empty()) throw ParseError("empty star pattern", 0);
  return eps;
}

unsigned long long bell_number(int n) {
  if (n < 0 || n > 25) throw ArgumentError("bell_number supports 0 <= n <= 25");
  // Bell triangle.
  std::vector<unsigned long long> row{1};
  for (int i = 0; i < n; ++i) {
    std::vector<unsigned long long> next{row.back()};
    for (unsigned long long v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

void for_each_partition(int n, const std::function<void(const SetPartition&)>& visit, int guard) {
  if (n < 1) throw ArgumentError("enumerate_partitions requires n >= 1");
  if (n > guard) {
    throw ResourceLimitError("partition enumeration for n=" + std::to_string(n) + " exceeds guard " +
                             std::to_string(guard) + " (Bell(" + std::to_string(n) +
                             ")=" + std::to_string(bell_number(n)) + ")");
  }
  // Restricted growth strings in lexicographic order: a[0]=0, a[i] <= 1 + max(a[0..i-1]).
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  std::vector<int> prefix_max(static_cast<std::size_t>(n), 0);
  for (;;) {
    visit(SetPartition::from_labels(a));
    int i = n - 1;
    while (i > 0 && a[static_cast<std::size_t>(i)] > prefix_max[static_cast<std::size_t>(i - 1)]) --i;
    if (i == 0) return;
    ++a[static_cast<std::size_t>(i)];
    prefix_max[static_cast<std::size_t>(i)] = std::max(prefix_max[static_cast<std::size_t>(i - 1)], a[static_cast<std::size_t>(i)]);
    for (int k = i + 1; k < n; ++k) {
      a[static_cast<std::size_t>(k)] = 0;
      prefix_max[static_cast<std::size_t>(k)] = prefix_max[static_cast<std::size_t>(k - 1)];
    }
  }
}

std::vector<SetPartition> enumerate_partitions(int n, int guard) {
  std::vector<SetPartition> out;
  for_each_partition(n, [&](const SetPartition& p) { out.push_back(p); }, guard);
  return out;
}

std::vector<SetPartition> enumerate_noncrossing(int n, int guard) {
  std::vector<SetPartition> out;
  for_each_partition(n, [&](const SetPartition& p) {
    if (is_noncrossing(p)) out.push_back(p);
  }, guard);
  return out;
}

SetPartition join(const SetPartition& a, const SetPartition& b) {
  if (a.n() != b.n()) {
    throw ArgumentError("join of partitions of different sizes " + std::to_string(a.n()) + " and " + std::to_string(b.n()));
  }
  const int n = a.n();
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  auto unite = [&](const SetPartition& p) {
    for (const auto& block : p.blocks()) {
      for (std::size_t k = 1; k < block.size(); ++k) {
        const int r1 = find(block[0] - 1);
        const int r2 = find(block[k] - 1);
        if (r1 != r2) parent[static_cast<std::size_t>(std::max(r1, r2))] = std::min(r1, r2);
      }
    }
  };
  unite(a);
  unite(b);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) labels[static_cast<std::size_t>(j)] = find(j);
  return SetPartition::from_labels(labels);
}

SetPartition rotate_left(const SetPartition& p) {
  const int n = p.n();
  std::vector<SetPartition::Block> blocks;
  for (const auto& block : p.blocks()) {
    SetPartition::Block rotated;
    for (int j : block) rotated.push_back(j == 1 ? n : j - 1);
    blocks.push_back(std::move(rotated));
  }
  return SetPartition(n, std::move(blocks));
}

SetPartition rotate_left(const SetPartition& p, int times) {
  const int n = p.n();
  const int shift = ((times % n) + n) % n;
  std::vector<SetPartition::Block> blocks;
  for (const auto& block : p.blocks()) {
    SetPartition::Block rotated;
    for (int j : block) rotated.push_back(((j - 1 - shift) % n + n) % n + 1);
    blocks.push_back(std::move(rotated));
  }
  return SetPartition(n, std::move(blocks));
}

SetPartition restrict(const SetPartition& p, const std::set<int>& keep) {
  if (keep.empty()) throw ArgumentError("restriction to an empty set");
  std::map<int, int> relabel;
  for (int j : keep) {
    if (j < 1 || j > p.n()) throw ArgumentError("restriction set element " + std::to_string(j) + " outside {1.." + std::to_string(p.n()) + "}");
    const int next = static_cast<int>(relabel.size()) + 1;
    relabel[j] = next;
  }
  std::vector<SetPartition::Block> blocks;
  for (const auto& block : p.blocks()) {
    SetPartition::Block kept;
    for (int j : block) {
      if (auto it = relabel.find(j); it != relabel.end()) kept.push_back(it->second);
    }
    if (!kept.empty()) blocks.push_back(std::move(kept));
  }
  return SetPartition(static_cast<int>(keep.size()), std::move(blocks));
}

SetPartition glue(const SetPartition& p, int k) {
  if (k < 1 || k >= p.n() || !p.same_block(k, k + 1)) {
    throw ArgumentError("glue requires k and k+1 in the same block");
  }
  std::set<int> keep;
  for (int j = 1; j <= p.n(); ++j) {
    if (j != k + 1) keep.insert(j);
  }
  return restrict(p, keep);
}

SetPartition direct_sum(const SetPartition& p, const SetPartition& q) {
  std::vector<SetPartition::Block> blocks = p.blocks();
  for (const auto& block : q.blocks()) {
    SetPartition::Block shifted;
    for (int j : block) shifted.push_back(j + p.n());
    blocks.push_back(std::move(shifted));
  }
  return SetPartition(p.n() + q.n(), std::move(blocks));
}

bool is_noncrossing(const SetPartition& p) {
  // Crossing iff some a<b<c<d with a~c, b~d in a different block. Checking consecutive pairs
  // within blocks suffices: blocks V, W cross iff an arc (v, v') of consecutive elements of V
  // separates two elements of W.
  const auto& blocks = p.blocks();
  for (std::size_t x = 0; x < blocks.size(); ++x) {
    const auto& v = blocks[x];
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      const int lo = v[k];
      const int hi = v[k + 1];
      for (int b = lo + 1; b < hi; ++b) {
        const auto& w = p.block_of(b);
        if (w.front() < lo || w.back() > hi) return false;
      }
    }
  }
  return true;
}

Classification classify(const SetPartition& p) {
  Classification c;
  c.noncrossing = is_noncrossing(p);
  const int n = p.n();
  for (int first = 1; first <= n && !c.splits_interval; ++first) {
    for (int last = first; last <= n; ++last) {
      if (last - first + 1 >= n) continue;
      if (p.splits_interval(first, last)) {
        c.splits_interval = std::make_pair(first, last);
        break;
      }
    }
  }
  bool neighbours = p.same_block(1, n);
  for (int k = 1; k < n && !neighbours; ++k) neighbours = p.same_block(k, k + 1);
  c.purely_crossing = !c.splits_interval && !neighbours;
  return c;
}

std::vector<SetPartition> enumerate_purely_crossing(int n, int guard) {
  std::vector<SetPartition> out;
  for_each_partition(n, [&](const SetPartition& p) {
    if (classify(p).purely_crossing) out.push_back(p);
  }, guard);
  return out;
}

SetPartition max_alternating_interval_partition(const StarPattern& eps) {
  const int n = eps.n();
  if (n < 1) throw ArgumentError("empty star pattern");
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (int i = 1; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    labels[u] = labels[u - 1] + (eps.star[u] == eps.star[u - 1] ? 1 : 0);
  }
  return SetPartition::from_labels(labels);
}

PartitionGeometry geometry(const SetPartition& p) {
  PartitionGeometry g{p, {}, {}};
  for (const auto& block : p.blocks()) {
    for (std::size_t k = 0; k + 1 < block.size(); ++k) g.j_set.insert(block[k]);
  }
  for (int q = 1; q <= p.n(); ++q) {
    std::set<int> s;
    for (int j = 1; j <= q; ++j) {
      if (p.block_of(j).back() > q) s.insert(j);
    }
    g.i_sets.emplace(q, std::move(s));
  }
  return g;
}

}  // namespace vdm
