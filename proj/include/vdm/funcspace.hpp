#pragma once

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vdm/rational.hpp"

namespace vdm {

/// Dense univariate polynomial in t with exact rational coefficients.
/// Coefficients are stored lowest degree first with no trailing zeros.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Rational> coeffs);

  static Polynomial constant(const Rational& c);
  /// The indeterminate t.
  static Polynomial t();

  /// -1 for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const noexcept { return coeffs_.empty(); }
  bool is_constant() const noexcept { return coeffs_.size() <= 1; }
  const std::vector<Rational>& coeffs() const noexcept { return coeffs_; }
  Rational coeff(int k) const;

  Rational operator()(const Rational& t) const;
  double eval(double t) const;

  Polynomial antiderivative() const;
  Rational integral(const Rational& a, const Rational& b) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(const Polynomial& o);
  Polynomial& operator*=(const Rational& c);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Polynomial& b) { return a *= b; }
  friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
  friend Polynomial operator*(const Rational& c, Polynomial a) { return a *= c; }
  friend Polynomial operator-(Polynomial a) { return a *= Rational(-1); }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

  Polynomial pow(unsigned k) const;

  /// Renders in the polynomial grammar, e.g. "1/2 + t - t^2"; parse_polynomial inverts it.
  std::string to_string() const;

 private:
  void trim();
  std::vector<Rational> coeffs_;
};

/// Unique polynomial of degree < points.size() through the points (Newton form).
/// Throws ArgumentError on duplicate abscissae or an empty point list.
Polynomial interpolate(std::span<const std::pair<Rational, Rational>> points);

/// Element of C[0,1] restricted to piecewise polynomials with rational data.
/// Piece i lives on (x_{i-1}, x_i]; t = 0 is served by the first piece.
/// Always canonical: adjacent identical pieces are merged.
class PiecewisePoly {
 public:
  /// The zero function.
  PiecewisePoly();
  PiecewisePoly(Polynomial p);  // NOLINT(google-explicit-constructor): polynomials are elements of C[0,1]
  PiecewisePoly(std::vector<Rational> breakpoints, std::vector<Polynomial> pieces);

  static PiecewisePoly constant(const Rational& c) { return PiecewisePoly(Polynomial::constant(c)); }
  static PiecewisePoly one() { return constant(Rational(1)); }
  static PiecewisePoly t() { return PiecewisePoly(Polynomial::t()); }

  const std::vector<Rational>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<Polynomial>& pieces() const noexcept { return pieces_; }
  std::size_t piece_count() const noexcept { return pieces_.size(); }

  bool is_zero() const noexcept { return pieces_.size() == 1 && pieces_[0].is_zero(); }
  /// Single piece of degree <= 0.
  bool is_constant() const noexcept { return pieces_.size() == 1 && pieces_[0].is_constant(); }
  bool is_one() const;
  Rational constant_value() const;
  /// Largest piece degree.
  int degree() const;

  std::size_t piece_index(const Rational& t) const;
  Rational eval_at(const Rational& t) const;
  double eval(double t) const;

  /// Lebesgue integral over [0,1].
  Rational tau() const;

  PiecewisePoly& operator+=(const PiecewisePoly& o);
  PiecewisePoly& operator-=(const PiecewisePoly& o);
  PiecewisePoly& operator*=(const PiecewisePoly& o);
  PiecewisePoly& operator*=(const Rational& c);

  friend PiecewisePoly operator+(PiecewisePoly a, const PiecewisePoly& b) { return a += b; }
  friend PiecewisePoly operator-(PiecewisePoly a, const PiecewisePoly& b) { return a -= b; }
  friend PiecewisePoly operator*(PiecewisePoly a, const PiecewisePoly& b) { return a *= b; }
  friend PiecewisePoly operator*(PiecewisePoly a, const Rational& c) { return a *= c; }
  friend PiecewisePoly operator*(const Rational& c, PiecewisePoly a) { return a *= c; }
  friend bool operator==(const PiecewisePoly& a, const PiecewisePoly& b) {
    return a.breakpoints_ == b.breakpoints_ && a.pieces_ == b.pieces_;
  }

  /// Grammar text: a bare polynomial when there is one piece, otherwise a piecewise{...} literal.
  std::string to_string() const;
  /// Compact exact serialisation used for hashing and cache keys.
  std::string canonical_key() const;

  nlohmann::json to_json() const;
  static PiecewisePoly from_json(const nlohmann::json& j);

 private:
  void canonicalize();
  /// Pieces of *this restricted to a refinement with the given breakpoints.
  std::vector<Polynomial> refined(const std::vector<Rational>& bps) const;
  template <class Op>
  PiecewisePoly& combine(const PiecewisePoly& o, Op op);

  std::vector<Rational> breakpoints_;
  std::vector<Polynomial> pieces_;
};

Rational tau(const PiecewisePoly& f);

/// Parses a polynomial expression in t: rationals, t, + - * ^ and parentheses.
Polynomial parse_polynomial(std::string_view text);
/// Parses either a polynomial expression or a piecewise{ [a,b]: poly; (b,c]: poly } literal.
PiecewisePoly parse_function(std::string_view text);

}  // namespace vdm
