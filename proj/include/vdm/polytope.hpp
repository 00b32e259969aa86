#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "vdm/funcspace.hpp"
#include "vdm/rational.hpp"

namespace vdm {

using Point = std::vector<Rational>;

/// Default dimension guard for exhaustive vertex enumeration.
inline constexpr int kMaxPolytopeDim = 9;

/// One two-sided (or upper-only) linear constraint: lower < a.x <= upper.
/// Integration always uses the closure.
struct LinearConstraint {
  std::vector<Rational> normal;
  std::optional<Rational> lower;
  Rational upper;
};

/// Half-space a.x <= b.
struct Halfspace {
  std::vector<Rational> normal;
  Rational bound;

  friend bool operator==(const Halfspace&, const Halfspace&) = default;
  friend auto operator<=>(const Halfspace& a, const Halfspace& b) {
    if (a.normal != b.normal) return a.normal < b.normal ? std::strong_ordering::less : std::strong_ordering::greater;
    if (a.bound != b.bound) return a.bound < b.bound ? std::strong_ordering::less : std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
};

class RationalPolytope {
 public:
  explicit RationalPolytope(int dim);

  int dim() const noexcept { return dim_; }
  const std::vector<LinearConstraint>& constraints() const noexcept { return constraints_; }

  void add(LinearConstraint c);
  /// lower <= a.x <= upper.
  void add_range(std::vector<Rational> normal, Rational lower, Rational upper);
  void add_upper(std::vector<Rational> normal, Rational upper);

  /// Deduplicated half-space form of the closure.
  std::vector<Halfspace> halfspaces() const;
  bool is_bounded() const;

  /// Axis-aligned box [lo, hi]^dim.
  static RationalPolytope box(int dim, const Rational& lo, const Rational& hi);

 private:
  int dim_;
  std::vector<LinearConstraint> constraints_;
};

struct Simplex {
  std::vector<Point> vertices;

  int dim() const { return static_cast<int>(vertices.size()) - 1; }
  /// |det(v_i - v_0)|.
  Rational abs_det() const;
  Rational volume() const;
};

/// Sparse multivariate polynomial with rational coefficients.
class MultiPoly {
 public:
  using Exponent = std::vector<unsigned>;

  explicit MultiPoly(int nvars = 0) : nvars_(nvars) {}
  static MultiPoly constant(int nvars, const Rational& c);
  static MultiPoly variable(int nvars, int index);
  /// c + a.x as a polynomial.
  static MultiPoly affine(const std::vector<Rational>& a, const Rational& c);
  /// g(c + a.x).
  static MultiPoly compose(const Polynomial& g, const std::vector<Rational>& a, const Rational& c);

  int nvars() const noexcept { return nvars_; }
  const std::map<Exponent, Rational>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  int degree() const;

  void add_term(const Exponent& e, const Rational& c);
  Rational operator()(std::span<const Rational> x) const;
  double eval(std::span<const double> x) const;

  MultiPoly& operator+=(const MultiPoly& o);
  MultiPoly& operator*=(const MultiPoly& o);
  MultiPoly& operator*=(const Rational& c);
  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
  friend MultiPoly operator*(MultiPoly a, const MultiPoly& b) { return a *= b; }
  friend MultiPoly operator*(MultiPoly a, const Rational& c) { return a *= c; }
  friend bool operator==(const MultiPoly&, const MultiPoly&) = default;
  MultiPoly pow(unsigned k) const;

 private:
  int nvars_;
  std::map<Exponent, Rational> terms_;
};

/// x -> c + a.x
struct AffineForm {
  std::vector<Rational> coeffs;
  Rational constant;

  Rational operator()(std::span<const Rational> x) const;
};

/// scale * prod_k g_k(affine_k(x)): the integrand shape produced by the Lambda maps.
struct ProductIntegrand {
  Rational scale{1};
  std::vector<std::pair<Polynomial, AffineForm>> factors;

  int degree() const;
  Rational operator()(std::span<const Rational> x) const;
  MultiPoly expand(int nvars) const;
};

/// Vertices of the closure, sorted lexicographically. Empty when the interior is empty.
std::vector<Point> vertex_enumeration(const RationalPolytope& p, int guard = kMaxPolytopeDim);

enum class PullOrder { lowest_first, highest_first };

/// Triangulation of conv(vertices) by recursive pulling. Empty if the points are not full-dimensional.
std::vector<Simplex> triangulate(std::span<const Point> vertices, PullOrder order = PullOrder::lowest_first);
/// Same, using the polytope's own facet description.
std::vector<Simplex> triangulate(const RationalPolytope& p, PullOrder order = PullOrder::lowest_first,
                                 int guard = kMaxPolytopeDim);

/// Exact integral over a simplex: affine change of variables plus the Dirichlet monomial formula.
Rational integrate(const Simplex& s, const MultiPoly& f);
/// Exact integral over a simplex by Grundmann-Moller cubature of sufficient degree.
Rational integrate(const Simplex& s, const ProductIntegrand& f);

Rational integrate(const RationalPolytope& p, const MultiPoly& f, int guard = kMaxPolytopeDim);
Rational integrate(const RationalPolytope& p, const ProductIntegrand& f, int guard = kMaxPolytopeDim);
Rational volume(const RationalPolytope& p, int guard = kMaxPolytopeDim);

/// a.x <= c0 + c1*s, a polytope family in a scalar parameter s.
struct ParametricHalfspace {
  std::vector<Rational> normal;
  Rational c0;
  Rational c1;
};

/// Parameters in (lo, hi) at which some parametric vertex becomes degenerate.
/// Integrals of polynomials over the family are polynomial in s between consecutive values.
std::vector<Rational> critical_parameters(int dim, std::span<const ParametricHalfspace> rows, const Rational& lo,
                                          const Rational& hi, int guard = kMaxPolytopeDim);

}  // namespace vdm
