#include "vdm/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "vdm/error.hpp"

namespace vdm {

namespace {

using Matrix = std::vector<std::vector<Rational>>;

void check_guard(int dim, int guard) {
  if (dim < 0) throw ArgumentError("negative polytope dimension");
  if (dim > guard) {
    throw ResourceLimitError("polytope dimension " + std::to_string(dim) + " exceeds guard " + std::to_string(guard));
  }
}

Rational dot(std::span<const Rational> a, std::span<const Rational> b) {
  Rational s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (sgn(a[i]) != 0) s += a[i] * b[i];
  }
  return s;
}

/// Row-reduces in place; returns the pivot columns.
std::vector<int> row_reduce(Matrix& m, int cols) {
  std::vector<int> pivots;
  std::size_t row = 0;
  for (int c = 0; c < cols && row < m.size(); ++c) {
    std::size_t p = row;
    while (p < m.size() && sgn(m[p][c]) == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[p], m[row]);
    const Rational inv = 1 / m[row][c];
    for (auto& x : m[row]) x *= inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || sgn(m[r][c]) == 0) continue;
      const Rational f = m[r][c];
      for (std::size_t k = static_cast<std::size_t>(c); k < m[r].size(); ++k) m[r][k] -= f * m[row][k];
    }
    pivots.push_back(c);
    ++row;
  }
  return pivots;
}

int rank_of(Matrix m, int cols) { return static_cast<int>(row_reduce(m, cols).size()); }

/// Solves a x = rhs (columns of rhs are independent right-hand sides). nullopt if a is singular.
std::optional<Matrix> solve_exact(const Matrix& a, const Matrix& rhs) {
  const int n = static_cast<int>(a.size());
  const int k = rhs.empty() ? 0 : static_cast<int>(rhs[0].size());
  Matrix m(a.size());
  for (int i = 0; i < n; ++i) {
    m[i] = a[i];
    m[i].insert(m[i].end(), rhs[i].begin(), rhs[i].end());
  }
  if (static_cast<int>(row_reduce(m, n).size()) < n) return std::nullopt;
  Matrix x(n, std::vector<Rational>(k));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) x[i][j] = m[i][n + j];
  return x;
}

Rational determinant(Matrix m) {
  const std::size_t n = m.size();
  Rational det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && sgn(m[p][c]) == 0) ++p;
    if (p == n) return Rational(0);
    if (p != c) {
      std::swap(m[p], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      if (sgn(m[r][c]) == 0) continue;
      const Rational f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return det;
}

/// Dense double solve with partial pivoting; false when numerically singular.
bool solve_double(std::vector<double> a, std::vector<double>& b, int n, int k) {
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[p * n + c])) p = r;
    if (std::abs(a[p * n + c]) < 1e-10) return false;
    if (p != c) {
      for (int j = 0; j < n; ++j) std::swap(a[p * n + j], a[c * n + j]);
      for (int j = 0; j < k; ++j) std::swap(b[p * k + j], b[c * k + j]);
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r * n + c] / a[c * n + c];
      if (f == 0) continue;
      for (int j = c; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
      for (int j = 0; j < k; ++j) b[r * k + j] -= f * b[c * k + j];
    }
  }
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < k; ++j) b[r * k + j] /= a[r * n + r];
  return true;
}

/// Calls f on each k-subset of {0..n-1} in lexicographic order.
template <class F>
void for_each_subset(int n, int k, F&& f) {
  if (k > n) return;
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

/// Scales so the first nonzero coefficient has absolute value 1.
Halfspace normalized(Halfspace h) {
  for (const auto& a : h.normal) {
    if (sgn(a) != 0) {
      const Rational s = 1 / abs(a);
      for (auto& x : h.normal) x *= s;
      h.bound *= s;
      break;
    }
  }
  return h;
}

bool is_zero_vector(const std::vector<Rational>& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& x) { return sgn(x) == 0; });
}

/// Vertices of {a.x <= b} together with the incidence table.
struct VertexData {
  int dim = 0;
  bool feasible = true;
  std::vector<Halfspace> hs;
  std::vector<Point> vertices;
  std::vector<std::vector<char>> tight;  // tight[h][v]
};

VertexData compute_vertices(int dim, std::vector<Halfspace> input) {
  VertexData out;
  out.dim = dim;
  std::map<std::vector<Rational>, Rational> tightest;
  for (auto& raw : input) {
    if (is_zero_vector(raw.normal)) {
      if (sgn(raw.bound) < 0) out.feasible = false;
      continue;
    }
    auto h = normalized(std::move(raw));
    auto [it, inserted] = tightest.emplace(h.normal, h.bound);
    if (!inserted && h.bound < it->second) it->second = h.bound;
  }
  if (!out.feasible) return out;
  for (auto& [normal, bound] : tightest) out.hs.push_back(Halfspace{normal, bound});

  const int m = static_cast<int>(out.hs.size());
  std::vector<double> ad(static_cast<std::size_t>(m) * dim), bd(static_cast<std::size_t>(m));
  for (int h = 0; h < m; ++h) {
    for (int j = 0; j < dim; ++j) ad[h * dim + j] = to_double(out.hs[h].normal[j]);
    bd[h] = to_double(out.hs[h].bound);
  }

  std::set<Point> found;
  if (dim == 0) {
    found.insert(Point{});
  } else {
    for_each_subset(m, dim, [&](const std::vector<int>& subset) {
      std::vector<double> a(static_cast<std::size_t>(dim) * dim), b(static_cast<std::size_t>(dim));
      for (int r = 0; r < dim; ++r) {
        for (int j = 0; j < dim; ++j) a[r * dim + j] = ad[subset[r] * dim + j];
        b[r] = bd[subset[r]];
      }
      if (!solve_double(a, b, dim, 1)) return;
      for (int h = 0; h < m; ++h) {
        double lhs = 0, scale = 1 + std::abs(bd[h]);
        for (int j = 0; j < dim; ++j) {
          lhs += ad[h * dim + j] * b[j];
          scale += std::abs(ad[h * dim + j] * b[j]);
        }
        if (lhs > bd[h] + 1e-7 * scale) return;
      }
      Matrix ae(dim), be(dim);
      for (int r = 0; r < dim; ++r) {
        ae[r] = out.hs[subset[r]].normal;
        be[r] = {out.hs[subset[r]].bound};
      }
      auto x = solve_exact(ae, be);
      if (!x) return;
      Point p(static_cast<std::size_t>(dim));
      for (int j = 0; j < dim; ++j) p[j] = (*x)[j][0];
      for (const auto& h : out.hs)
        if (dot(h.normal, p) > h.bound) return;
      found.insert(std::move(p));
    });
  }
  out.vertices.assign(found.begin(), found.end());
  out.tight.assign(out.hs.size(), std::vector<char>(out.vertices.size(), 0));
  for (std::size_t h = 0; h < out.hs.size(); ++h)
    for (std::size_t v = 0; v < out.vertices.size(); ++v)
      out.tight[h][v] = dot(out.hs[h].normal, out.vertices[v]) == out.hs[h].bound ? 1 : 0;
  return out;
}

/// Dimension of the face spanned by the given vertices, from the normals tight on all of them.
int face_dim(const VertexData& vd, const std::vector<int>& face) {
  Matrix normals;
  for (std::size_t h = 0; h < vd.hs.size(); ++h) {
    if (std::all_of(face.begin(), face.end(), [&](int v) { return vd.tight[h][v] != 0; })) {
      normals.push_back(vd.hs[h].normal);
    }
  }
  return vd.dim - rank_of(std::move(normals), vd.dim);
}

class Puller {
 public:
  Puller(const VertexData& vd, PullOrder order) : vd_(vd), order_(order) {}

  std::vector<std::vector<int>> run(const std::vector<int>& face, int k) {
    if (k == 0) return {{face.front()}};
    if (auto it = memo_.find(face); it != memo_.end()) return it->second;
    const int apex = order_ == PullOrder::lowest_first ? face.front() : face.back();
    std::set<std::vector<int>> facets;
    for (const auto& row : vd_.tight) {
      std::vector<int> g;
      for (int v : face)
        if (row[v]) g.push_back(v);
      if (static_cast<int>(g.size()) < k || g.size() == face.size()) continue;
      if (std::binary_search(g.begin(), g.end(), apex)) continue;
      facets.insert(std::move(g));
    }
    std::vector<std::vector<int>> out;
    for (const auto& g : facets) {
      if (face_dim(vd_, g) != k - 1) continue;
      for (auto s : run(g, k - 1)) {
        s.insert(s.begin(), apex);
        out.push_back(std::move(s));
      }
    }
    memo_.emplace(face, out);
    return out;
  }

 private:
  const VertexData& vd_;
  PullOrder order_;
  std::map<std::vector<int>, std::vector<std::vector<int>>> memo_;
};

std::vector<Simplex> pull_triangulation(const VertexData& vd, PullOrder order) {
  if (vd.vertices.empty()) return {};
  std::vector<int> all(vd.vertices.size());
  std::iota(all.begin(), all.end(), 0);
  if (face_dim(vd, all) != vd.dim) return {};
  if (vd.dim == 0) return {Simplex{{vd.vertices.front()}}};
  Puller puller(vd, order);
  std::vector<Simplex> out;
  for (const auto& idx : puller.run(all, vd.dim)) {
    Simplex s;
    for (int v : idx) s.vertices.push_back(vd.vertices[v]);
    if (sgn(s.abs_det()) != 0) out.push_back(std::move(s));
  }
  return out;
}

/// The (unique up to scale) nonzero solution of rows.x = 0 when rows have rank cols-1.
std::optional<std::vector<Rational>> null_vector(Matrix rows, int cols) {
  const auto pivots = row_reduce(rows, cols);
  if (static_cast<int>(pivots.size()) != cols - 1) return std::nullopt;
  int free_col = 0;
  while (free_col < cols && std::find(pivots.begin(), pivots.end(), free_col) != pivots.end()) ++free_col;
  std::vector<Rational> v(static_cast<std::size_t>(cols));
  v[free_col] = 1;
  for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -rows[r][free_col];
  return v;
}

VertexData polytope_vertices(const RationalPolytope& p, int guard) {
  check_guard(p.dim(), guard);
  if (!p.is_bounded()) throw ArgumentError("polytope is unbounded");
  return compute_vertices(p.dim(), p.halfspaces());
}

}  // namespace

RationalPolytope::RationalPolytope(int dim) : dim_(dim) {
  if (dim < 0) throw ArgumentError("negative polytope dimension");
}

void RationalPolytope::add(LinearConstraint c) {
  if (static_cast<int>(c.normal.size()) != dim_) throw ArgumentError("constraint normal has wrong dimension");
  constraints_.push_back(std::move(c));
}

void RationalPolytope::add_range(std::vector<Rational> normal, Rational lower, Rational upper) {
  add(LinearConstraint{std::move(normal), std::move(lower), std::move(upper)});
}

void RationalPolytope::add_upper(std::vector<Rational> normal, Rational upper) {
  add(LinearConstraint{std::move(normal), std::nullopt, std::move(upper)});
}

std::vector<Halfspace> RationalPolytope::halfspaces() const {
  std::set<Halfspace> out;
  for (const auto& c : constraints_) {
    out.insert(Halfspace{c.normal, c.upper});
    if (c.lower) {
      Halfspace h{c.normal, -*c.lower};
      for (auto& x : h.normal) x = -x;
      out.insert(std::move(h));
    }
  }
  return {out.begin(), out.end()};
}

bool RationalPolytope::is_bounded() const {
  if (dim_ == 0) return true;
  Matrix equal, upper;
  for (const auto& c : constraints_) {
    if (is_zero_vector(c.normal)) continue;
    (c.lower ? equal : upper).push_back(c.normal);
  }
  Matrix all = equal;
  all.insert(all.end(), upper.begin(), upper.end());
  if (rank_of(all, dim_) < dim_) return false;
  bool bounded = true;
  for_each_subset(static_cast<int>(all.size()), dim_ - 1, [&](const std::vector<int>& subset) {
    if (!bounded) return;
    Matrix rows;
    for (int i : subset) rows.push_back(all[i]);
    auto r = null_vector(std::move(rows), dim_);
    if (!r) return;
    for (int sign : {1, -1}) {
      bool in_cone = true;
      for (const auto& e : equal) in_cone = in_cone && sgn(dot(e, *r)) == 0;
      for (const auto& u : upper) in_cone = in_cone && sign * sgn(dot(u, *r)) <= 0;
      if (in_cone) bounded = false;
    }
  });
  return bounded;
}

RationalPolytope RationalPolytope::box(int dim, const Rational& lo, const Rational& hi) {
  RationalPolytope p(dim);
  for (int i = 0; i < dim; ++i) {
    std::vector<Rational> e(static_cast<std::size_t>(dim));
    e[i] = 1;
    p.add_range(std::move(e), lo, hi);
  }
  return p;
}

Rational Simplex::abs_det() const {
  const int d = dim();
  if (d <= 0) return Rational(1);
  Matrix m(d, std::vector<Rational>(static_cast<std::size_t>(d)));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m[i][j] = vertices[i + 1][j] - vertices[0][j];
  return abs(determinant(std::move(m)));
}

Rational Simplex::volume() const { return abs_det() / factorial(static_cast<unsigned>(std::max(dim(), 0))); }

MultiPoly MultiPoly::constant(int nvars, const Rational& c) {
  MultiPoly p(nvars);
  p.add_term(Exponent(static_cast<std::size_t>(nvars), 0), c);
  return p;
}

MultiPoly MultiPoly::variable(int nvars, int index) {
  if (index < 0 || index >= nvars) throw ArgumentError("variable index out of range");
  MultiPoly p(nvars);
  Exponent e(static_cast<std::size_t>(nvars), 0);
  e[index] = 1;
  p.add_term(e, Rational(1));
  return p;
}

MultiPoly MultiPoly::affine(const std::vector<Rational>& a, const Rational& c) {
  const int n = static_cast<int>(a.size());
  MultiPoly p = constant(n, c);
  for (int i = 0; i < n; ++i) p += variable(n, i) * a[i];
  return p;
}

MultiPoly MultiPoly::compose(const Polynomial& g, const std::vector<Rational>& a, const Rational& c) {
  const int n = static_cast<int>(a.size());
  const MultiPoly x = affine(a, c);
  MultiPoly out(n);
  for (int k = g.degree(); k >= 0; --k) {
    out *= x;
    out += constant(n, g.coeff(k));
  }
  return out;
}

int MultiPoly::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, static_cast<int>(std::accumulate(e.begin(), e.end(), 0u)));
  return d;
}

void MultiPoly::add_term(const Exponent& e, const Rational& c) {
  if (static_cast<int>(e.size()) != nvars_) throw ArgumentError("exponent has wrong arity");
  if (sgn(c) == 0) return;
  auto [it, inserted] = terms_.emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (sgn(it->second) == 0) terms_.erase(it);
  }
}

Rational MultiPoly::operator()(std::span<const Rational> x) const {
  if (static_cast<int>(x.size()) != nvars_) throw ArgumentError("point has wrong arity");
  Rational sum;
  for (const auto& [e, c] : terms_) {
    Rational term = c;
    for (int i = 0; i < nvars_; ++i) {
      for (unsigned k = 0; k < e[i]; ++k) term *= x[i];
    }
    sum += term;
  }
  return sum;
}

double MultiPoly::eval(std::span<const double> x) const {
  double sum = 0;
  for (const auto& [e, c] : terms_) {
    double term = to_double(c);
    for (int i = 0; i < nvars_; ++i) term *= std::pow(x[i], static_cast<double>(e[i]));
    sum += term;
  }
  return sum;
}

MultiPoly& MultiPoly::operator+=(const MultiPoly& o) {
  if (o.nvars_ != nvars_) throw ArgumentError("polynomial arity mismatch");
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

MultiPoly& MultiPoly::operator*=(const MultiPoly& o) {
  if (o.nvars_ != nvars_) throw ArgumentError("polynomial arity mismatch");
  MultiPoly out(nvars_);
  for (const auto& [e1, c1] : terms_) {
    for (const auto& [e2, c2] : o.terms_) {
      Exponent e(e1);
      for (int i = 0; i < nvars_; ++i) e[i] += e2[i];
      out.add_term(e, c1 * c2);
    }
  }
  terms_ = std::move(out.terms_);
  return *this;
}

MultiPoly& MultiPoly::operator*=(const Rational& c) {
  if (sgn(c) == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, v] : terms_) v *= c;
  return *this;
}

MultiPoly MultiPoly::pow(unsigned k) const {
  MultiPoly out = constant(nvars_, Rational(1));
  for (unsigned i = 0; i < k; ++i) out *= *this;
  return out;
}

Rational AffineForm::operator()(std::span<const Rational> x) const { return constant + dot(coeffs, x); }

int ProductIntegrand::degree() const {
  int d = 0;
  for (const auto& [g, a] : factors) {
    if (g.is_zero()) return -1;
    d += g.degree();
  }
  return d;
}

Rational ProductIntegrand::operator()(std::span<const Rational> x) const {
  Rational v = scale;
  for (const auto& [g, a] : factors) v *= g(a(x));
  return v;
}

MultiPoly ProductIntegrand::expand(int nvars) const {
  MultiPoly out = MultiPoly::constant(nvars, scale);
  for (const auto& [g, a] : factors) {
    if (static_cast<int>(a.coeffs.size()) != nvars) throw ArgumentError("affine form has wrong arity");
    out *= MultiPoly::compose(g, a.coeffs, a.constant);
  }
  return out;
}

std::vector<Point> vertex_enumeration(const RationalPolytope& p, int guard) {
  const auto vd = polytope_vertices(p, guard);
  if (vd.vertices.empty()) return {};
  std::vector<int> all(vd.vertices.size());
  std::iota(all.begin(), all.end(), 0);
  if (face_dim(vd, all) != p.dim()) return {};
  return vd.vertices;
}

std::vector<Simplex> triangulate(std::span<const Point> vertices, PullOrder order) {
  if (vertices.empty()) return {};
  const int d = static_cast<int>(vertices.front().size());
  for (const auto& v : vertices)
    if (static_cast<int>(v.size()) != d) throw ArgumentError("points have mixed dimensions");
  if (static_cast<int>(vertices.size()) < d + 1) return {};
  std::set<Point> unique(vertices.begin(), vertices.end());
  std::vector<Point> pts(unique.begin(), unique.end());
  if (d == 0) return {Simplex{{pts.front()}}};

  Matrix diffs;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    std::vector<Rational> row(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) row[j] = pts[i][j] - pts[0][j];
    diffs.push_back(std::move(row));
  }
  if (rank_of(diffs, d) < d) return {};

  std::set<Halfspace> hull;
  for_each_subset(static_cast<int>(pts.size()), d, [&](const std::vector<int>& subset) {
    Matrix rows;
    for (int i = 1; i < d; ++i) {
      std::vector<Rational> row(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j) row[j] = pts[subset[i]][j] - pts[subset[0]][j];
      rows.push_back(std::move(row));
    }
    auto a = null_vector(std::move(rows), d);
    if (!a) return;
    const Rational b = dot(*a, pts[subset[0]]);
    bool below = true, above = true;
    for (const auto& q : pts) {
      const int s = sgn(dot(*a, q) - b);
      below = below && s <= 0;
      above = above && s >= 0;
    }
    if (!below && !above) return;
    Halfspace h{*a, b};
    if (!below) {
      for (auto& x : h.normal) x = -x;
      h.bound = -h.bound;
    }
    hull.insert(normalized(std::move(h)));
  });

  VertexData vd;
  vd.dim = d;
  vd.hs.assign(hull.begin(), hull.end());
  vd.vertices = std::move(pts);
  vd.tight.assign(vd.hs.size(), std::vector<char>(vd.vertices.size(), 0));
  for (std::size_t h = 0; h < vd.hs.size(); ++h)
    for (std::size_t v = 0; v < vd.vertices.size(); ++v)
      vd.tight[h][v] = dot(vd.hs[h].normal, vd.vertices[v]) == vd.hs[h].bound ? 1 : 0;
  return pull_triangulation(vd, order);
}

std::vector<Simplex> triangulate(const RationalPolytope& p, PullOrder order, int guard) {
  return pull_triangulation(polytope_vertices(p, guard), order);
}

Rational integrate(const Simplex& s, const MultiPoly& f) {
  const int n = s.dim();
  if (f.nvars() != n) throw ArgumentError("integrand arity does not match simplex dimension");
  if (n == 0) return f(std::span<const Rational>{});
  const Rational jac = s.abs_det();
  if (sgn(jac) == 0 || f.is_zero()) return Rational(0);

  // x_i = v0_i + sum_j (v_j - v0)_i y_j over the standard simplex in y.
  std::vector<MultiPoly> subst;
  for (int i = 0; i < n; ++i) {
    std::vector<Rational> a(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) a[j] = s.vertices[j + 1][i] - s.vertices[0][i];
    subst.push_back(MultiPoly::affine(a, s.vertices[0][i]));
  }
  std::vector<std::vector<MultiPoly>> powers(static_cast<std::size_t>(n));
  auto power = [&](int i, unsigned k) -> const MultiPoly& {
    auto& cache = powers[i];
    if (cache.empty()) cache.push_back(MultiPoly::constant(n, Rational(1)));
    while (cache.size() <= k) cache.push_back(cache.back() * subst[i]);
    return cache[k];
  };

  MultiPoly pulled(n);
  for (const auto& [e, c] : f.terms()) {
    MultiPoly term = MultiPoly::constant(n, c);
    for (int i = 0; i < n; ++i)
      if (e[i] > 0) term *= power(i, e[i]);
    pulled += term;
  }

  Rational sum;
  for (const auto& [e, c] : pulled.terms()) {
    Rational num(1);
    unsigned total = 0;
    for (unsigned a : e) {
      num *= factorial(a);
      total += a;
    }
    sum += c * num / factorial(total + static_cast<unsigned>(n));
  }
  return sum * jac;
}

Rational integrate(const Simplex& s, const ProductIntegrand& f) {
  const int n = s.dim();
  const int degree = f.degree();
  if (degree < 0 || sgn(f.scale) == 0) return Rational(0);
  if (n == 0) return f(std::span<const Rational>(s.vertices.front()));
  const Rational jac = s.abs_det();
  if (sgn(jac) == 0) return Rational(0);
  if (degree == 0) {
    Rational v = f.scale;
    for (const auto& [g, a] : f.factors) v *= g.coeff(0);
    return v * jac / factorial(static_cast<unsigned>(n));
  }

  // Affine images of the vertices; the affine image of a barycentric point is the same combination.
  const std::size_t nf = f.factors.size();
  std::vector<std::vector<Rational>> u(nf, std::vector<Rational>(static_cast<std::size_t>(n) + 1));
  for (std::size_t p = 0; p < nf; ++p)
    for (int k = 0; k <= n; ++k) u[p][k] = f.factors[p].second(s.vertices[k]);

  const int sdeg = std::max(0, degree / 2);
  const int d = 2 * sdeg + 1;
  Rational total;
  std::vector<int> beta(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i <= sdeg; ++i) {
    const int m = d + n - 2 * i;
    Integer mpow;
    mpz_pow_ui(mpow.get_mpz_t(), Integer(m).get_mpz_t(), static_cast<unsigned long>(d));
    Rational denom = factorial(static_cast<unsigned>(i)) * factorial(static_cast<unsigned>(d + n - i));
    denom <<= static_cast<mp_bitcnt_t>(2 * sdeg);
    Rational weight = Rational(mpow) / denom;
    if (i % 2 == 1) weight = -weight;

    Rational inner;
    auto visit = [&] {
      Rational v = f.scale;
      for (std::size_t p = 0; p < nf && sgn(v) != 0; ++p) {
        Rational arg;
        for (int k = 0; k <= n; ++k) arg += (2 * beta[k] + 1) * u[p][k];
        arg /= m;
        v *= f.factors[p].first(arg);
      }
      inner += v;
    };
    // All compositions of sdeg - i into n + 1 nonnegative parts.
    auto compositions = [&](auto&& self, int pos, int remaining) -> void {
      if (pos == n) {
        beta[n] = remaining;
        visit();
        return;
      }
      for (int b = 0; b <= remaining; ++b) {
        beta[pos] = b;
        self(self, pos + 1, remaining - b);
      }
    };
    compositions(compositions, 0, sdeg - i);
    total += weight * inner;
  }
  return total * jac;
}

Rational integrate(const RationalPolytope& p, const MultiPoly& f, int guard) {
  if (f.nvars() != p.dim()) throw ArgumentError("integrand arity does not match polytope dimension");
  Rational sum;
  for (const auto& s : triangulate(p, PullOrder::lowest_first, guard)) sum += integrate(s, f);
  return sum;
}

Rational integrate(const RationalPolytope& p, const ProductIntegrand& f, int guard) {
  Rational sum;
  for (const auto& s : triangulate(p, PullOrder::lowest_first, guard)) sum += integrate(s, f);
  return sum;
}

Rational volume(const RationalPolytope& p, int guard) {
  Rational sum;
  for (const auto& s : triangulate(p, PullOrder::lowest_first, guard)) sum += s.volume();
  return sum;
}

std::vector<Rational> critical_parameters(int dim, std::span<const ParametricHalfspace> input, const Rational& lo,
                                          const Rational& hi, int guard) {
  check_guard(dim, guard);
  std::vector<ParametricHalfspace> rows;
  {
    std::set<std::tuple<std::vector<Rational>, Rational, Rational>> seen;
    for (const auto& r : input) {
      if (static_cast<int>(r.normal.size()) != dim) throw ArgumentError("parametric row has wrong dimension");
      if (is_zero_vector(r.normal)) continue;
      Rational scale(1);
      for (const auto& x : r.normal) {
        if (sgn(x) != 0) {
          scale = 1 / abs(x);
          break;
        }
      }
      ParametricHalfspace n{r.normal, r.c0 * scale, r.c1 * scale};
      for (auto& x : n.normal) x *= scale;
      if (seen.emplace(n.normal, n.c0, n.c1).second) rows.push_back(std::move(n));
    }
  }
  const int m = static_cast<int>(rows.size());
  std::set<Rational> out;
  if (dim == 0) return {};

  std::vector<double> ad(static_cast<std::size_t>(m) * dim);
  for (int h = 0; h < m; ++h)
    for (int j = 0; j < dim; ++j) ad[h * dim + j] = to_double(rows[h].normal[j]);

  auto feasible_at = [&](const std::vector<Rational>& x0, const std::vector<Rational>& x1, const Rational& s) {
    std::vector<Rational> x(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) x[j] = x0[j] + s * x1[j];
    for (const auto& r : rows)
      if (dot(r.normal, x) > r.c0 + r.c1 * s) return false;
    return true;
  };

  for_each_subset(m, dim, [&](const std::vector<int>& subset) {
    std::vector<double> a(static_cast<std::size_t>(dim) * dim), b(static_cast<std::size_t>(dim) * 2);
    for (int r = 0; r < dim; ++r) {
      for (int j = 0; j < dim; ++j) a[r * dim + j] = ad[subset[r] * dim + j];
      b[r * 2] = to_double(rows[subset[r]].c0);
      b[r * 2 + 1] = to_double(rows[subset[r]].c1);
    }
    if (!solve_double(a, b, dim, 2)) return;
    Matrix ae(dim), be(dim);
    for (int r = 0; r < dim; ++r) {
      ae[r] = rows[subset[r]].normal;
      be[r] = {rows[subset[r]].c0, rows[subset[r]].c1};
    }
    auto x = solve_exact(ae, be);
    if (!x) return;
    std::vector<Rational> x0(static_cast<std::size_t>(dim)), x1(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
      x0[j] = (*x)[j][0];
      x1[j] = (*x)[j][1];
    }
    for (int k = 0; k < m; ++k) {
      if (std::binary_search(subset.begin(), subset.end(), k)) continue;
      const Rational alpha = dot(rows[k].normal, x0) - rows[k].c0;
      const Rational beta = dot(rows[k].normal, x1) - rows[k].c1;
      if (sgn(beta) == 0) continue;
      const Rational s = -alpha / beta;
      if (!(lo < s && s < hi) || out.count(s)) continue;
      if (feasible_at(x0, x1, s)) out.insert(s);
    }
  });
  return {out.begin(), out.end()};
}

}  // namespace vdm
