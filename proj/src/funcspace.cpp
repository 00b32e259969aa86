#include "vdm/funcspace.hpp"

#include <algorithm>
#include <cctype>

#include "vdm/error.hpp"
#include "vdm/text_parser.hpp"

namespace vdm {

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

Polynomial Polynomial::constant(const Rational& c) { return Polynomial(std::vector<Rational>{c}); }

Polynomial Polynomial::t() { return Polynomial(std::vector<Rational>{Rational(0), Rational(1)}); }

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

Rational Polynomial::coeff(int k) const {
  if (k < 0 || k >= static_cast<int>(coeffs_.size())) return Rational(0);
  return coeffs_[static_cast<std::size_t>(k)];
}

Rational Polynomial::operator()(const Rational& t) const {
  Rational acc(0);
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    acc *= t;
    acc += *it;
  }
  return acc;
}

double Polynomial::eval(double t) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + it->get_d();
  return acc;
}

Polynomial Polynomial::antiderivative() const {
  std::vector<Rational> out(coeffs_.size() + 1, Rational(0));
  for (std::size_t k = 0; k < coeffs_.size(); ++k) out[k + 1] = coeffs_[k] / Rational(static_cast<long>(k + 1));
  return Polynomial(std::move(out));
}

Rational Polynomial::integral(const Rational& a, const Rational& b) const {
  const Polynomial F = antiderivative();
  return F(b) - F(a);
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
  for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  trim();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
  for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(const Polynomial& o) {
  if (is_zero() || o.is_zero()) {
    coeffs_.clear();
    return *this;
  }
  std::vector<Rational> out(coeffs_.size() + o.coeffs_.size() - 1, Rational(0));
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] == 0) continue;
    for (std::size_t j = 0; j < o.coeffs_.size(); ++j) out[i + j] += coeffs_[i] * o.coeffs_[j];
  }
  coeffs_ = std::move(out);
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c) {
  if (c == 0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& x : coeffs_) x *= c;
  return *this;
}

Polynomial Polynomial::pow(unsigned k) const {
  Polynomial result = constant(Rational(1));
  Polynomial base = *this;
  while (k) {
    if (k & 1U) result *= base;
    k >>= 1U;
    if (k) base *= base;
  }
  return result;
}

std::string Polynomial::to_string() const {
  if (coeffs_.empty()) return "0";
  std::string out;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    const Rational& c = coeffs_[k];
    if (c == 0) continue;
    const bool negative = c < 0;
    const Rational mag = abs(c);
    if (out.empty()) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    std::string mono;
    if (k == 1) mono = "t";
    else if (k > 1) mono = "t^" + std::to_string(k);
    if (mono.empty()) out += vdm::to_string(mag);
    else if (mag == 1) out += mono;
    else out += vdm::to_string(mag) + "*" + mono;
  }
  return out;
}

Polynomial interpolate(std::span<const std::pair<Rational, Rational>> points) {
  if (points.empty()) throw ArgumentError("interpolation needs at least one point");
  const std::size_t m = points.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (points[i].first == points[j].first) {
        throw ArgumentError("duplicate abscissa " + vdm::to_string(points[i].first) + " in interpolation");
      }
    }
  }
  // Divided differences.
  std::vector<Rational> dd(m);
  for (std::size_t i = 0; i < m; ++i) dd[i] = points[i].second;
  for (std::size_t level = 1; level < m; ++level) {
    for (std::size_t i = m - 1; i >= level; --i) {
      dd[i] = (dd[i] - dd[i - 1]) / (points[i].first - points[i - level].first);
      if (i == level) break;
    }
  }
  // Horner on the Newton form.
  Polynomial result = Polynomial::constant(dd[m - 1]);
  for (std::size_t i = m - 1; i-- > 0;) {
    result *= Polynomial(std::vector<Rational>{-points[i].first, Rational(1)});
    result += Polynomial::constant(dd[i]);
  }
  return result;
}

// ---------------------------------------------------------------------------
// PiecewisePoly

PiecewisePoly::PiecewisePoly() : breakpoints_{Rational(0), Rational(1)}, pieces_{Polynomial()} {}

PiecewisePoly::PiecewisePoly(Polynomial p) : breakpoints_{Rational(0), Rational(1)}, pieces_{std::move(p)} {}

PiecewisePoly::PiecewisePoly(std::vector<Rational> breakpoints, std::vector<Polynomial> pieces)
    : breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
  if (breakpoints_.size() < 2 || pieces_.size() + 1 != breakpoints_.size()) {
    throw ArgumentError("piecewise polynomial needs m+1 breakpoints for m pieces");
  }
  if (breakpoints_.front() != 0 || breakpoints_.back() != 1) {
    throw ArgumentError("piecewise polynomial breakpoints must run from 0 to 1");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i - 1] < breakpoints_[i])) throw ArgumentError("breakpoints must be strictly increasing");
  }
  canonicalize();
}

void PiecewisePoly::canonicalize() {
  std::vector<Rational> bps{breakpoints_.front()};
  std::vector<Polynomial> pcs;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (!pcs.empty() && pcs.back() == pieces_[i]) {
      bps.back() = breakpoints_[i + 1];
    } else {
      pcs.push_back(std::move(pieces_[i]));
      bps.push_back(breakpoints_[i + 1]);
    }
  }
  breakpoints_ = std::move(bps);
  pieces_ = std::move(pcs);
}

bool PiecewisePoly::is_one() const { return is_constant() && pieces_[0] == Polynomial::constant(Rational(1)); }

Rational PiecewisePoly::constant_value() const {
  if (!is_constant()) throw ContractError("function is not constant: " + to_string());
  return pieces_[0].coeff(0);
}

int PiecewisePoly::degree() const {
  int d = -1;
  for (const auto& p : pieces_) d = std::max(d, p.degree());
  return d;
}

std::size_t PiecewisePoly::piece_index(const Rational& t) const {
  if (t < 0 || t > 1) throw ArgumentError("evaluation point " + vdm::to_string(t) + " outside [0,1]");
  const auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), t);
  return static_cast<std::size_t>(it - (breakpoints_.begin() + 1));
}

Rational PiecewisePoly::eval_at(const Rational& t) const { return pieces_[piece_index(t)](t); }

double PiecewisePoly::eval(double t) const {
  std::size_t i = 0;
  while (i + 1 < pieces_.size() && t > breakpoints_[i + 1].get_d()) ++i;
  return pieces_[i].eval(t);
}

Rational PiecewisePoly::tau() const {
  Rational total(0);
  for (std::size_t i = 0; i < pieces_.size(); ++i) total += pieces_[i].integral(breakpoints_[i], breakpoints_[i + 1]);
  return total;
}

std::vector<Polynomial> PiecewisePoly::refined(const std::vector<Rational>& bps) const {
  std::vector<Polynomial> out;
  out.reserve(bps.size() - 1);
  std::size_t j = 0;
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    while (breakpoints_[j + 1] < bps[i + 1]) ++j;
    out.push_back(pieces_[j]);
  }
  return out;
}

template <class Op>
PiecewisePoly& PiecewisePoly::combine(const PiecewisePoly& o, Op op) {
  if (breakpoints_ == o.breakpoints_) {
    for (std::size_t i = 0; i < pieces_.size(); ++i) op(pieces_[i], o.pieces_[i]);
    canonicalize();
    return *this;
  }
  std::vector<Rational> bps;
  std::set_union(breakpoints_.begin(), breakpoints_.end(), o.breakpoints_.begin(), o.breakpoints_.end(),
                 std::back_inserter(bps));
  auto mine = refined(bps);
  const auto theirs = o.refined(bps);
  for (std::size_t i = 0; i < mine.size(); ++i) op(mine[i], theirs[i]);
  breakpoints_ = std::move(bps);
  pieces_ = std::move(mine);
  canonicalize();
  return *this;
}

PiecewisePoly& PiecewisePoly::operator+=(const PiecewisePoly& o) {
  return combine(o, [](Polynomial& a, const Polynomial& b) { a += b; });
}

PiecewisePoly& PiecewisePoly::operator-=(const PiecewisePoly& o) {
  return combine(o, [](Polynomial& a, const Polynomial& b) { a -= b; });
}

PiecewisePoly& PiecewisePoly::operator*=(const PiecewisePoly& o) {
  if (o.is_constant()) return *this *= o.constant_value();
  return combine(o, [](Polynomial& a, const Polynomial& b) { a *= b; });
}

PiecewisePoly& PiecewisePoly::operator*=(const Rational& c) {
  for (auto& p : pieces_) p *= c;
  canonicalize();
  return *this;
}

std::string PiecewisePoly::to_string() const {
  if (pieces_.size() == 1) return pieces_[0].to_string();
  std::string out = "piecewise{ ";
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (i) out += "; ";
    out += (i == 0 ? "[" : "(") + vdm::to_string(breakpoints_[i]) + "," + vdm::to_string(breakpoints_[i + 1]) + "]: ";
    out += pieces_[i].to_string();
  }
  return out + " }";
}

std::string PiecewisePoly::canonical_key() const {
  std::string out;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (i) out += "|" + breakpoints_[i].get_str() + "|";
    out += '(';
    for (std::size_t k = 0; k < pieces_[i].coeffs().size(); ++k) {
      if (k) out += ',';
      out += pieces_[i].coeffs()[k].get_str();
    }
    out += ')';
  }
  return out;
}

nlohmann::json PiecewisePoly::to_json() const {
  nlohmann::json bps = nlohmann::json::array();
  for (const auto& b : breakpoints_) bps.push_back(vdm::to_string(b));
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& p : pieces_) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& c : p.coeffs()) row.push_back(vdm::to_string(c));
    coeffs.push_back(std::move(row));
  }
  return {{"breakpoints", std::move(bps)}, {"coeffs", std::move(coeffs)}};
}

PiecewisePoly PiecewisePoly::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("breakpoints") || !j.contains("coeffs")) {
    throw ArgumentError("piecewise polynomial JSON needs 'breakpoints' and 'coeffs'");
  }
  std::vector<Rational> bps;
  for (const auto& b : j.at("breakpoints")) bps.push_back(parse_rational(b.get<std::string>()));
  std::vector<Polynomial> pieces;
  for (const auto& row : j.at("coeffs")) {
    std::vector<Rational> cs;
    for (const auto& c : row) cs.push_back(parse_rational(c.get<std::string>()));
    pieces.emplace_back(std::move(cs));
  }
  return PiecewisePoly(std::move(bps), std::move(pieces));
}

Rational tau(const PiecewisePoly& f) { return f.tau(); }

// ---------------------------------------------------------------------------
// Grammar

Polynomial TextParser::parse_poly_expr() {
  Polynomial acc = parse_poly_term();
  for (;;) {
    skip_space();
    if (eat('+')) acc += parse_poly_term();
    else if (eat('-')) acc -= parse_poly_term();
    else return acc;
  }
}

Polynomial TextParser::parse_poly_term() {
  Polynomial acc = parse_poly_unary();
  for (;;) {
    skip_space();
    if (eat('*')) acc *= parse_poly_unary();
    else return acc;
  }
}

Polynomial TextParser::parse_poly_unary() {
  skip_space();
  if (eat('-')) return -parse_poly_unary();
  if (eat('+')) return parse_poly_unary();
  Polynomial base = parse_poly_primary();
  skip_space();
  if (eat('^')) return base.pow(parse_exponent());
  return base;
}

Polynomial TextParser::parse_poly_primary() {
  skip_space();
  if (at_end()) fail("unexpected end of polynomial");
  const char c = peek();
  if (c == 't') {
    ++pos_;
    return Polynomial::t();
  }
  if (c == '(') {
    ++pos_;
    Polynomial inner = parse_poly_expr();
    expect(')');
    return inner;
  }
  if (std::isdigit(static_cast<unsigned char>(c))) return Polynomial::constant(parse_unsigned_rational());
  fail(std::string("unexpected character '") + c + "' in polynomial");
}

unsigned TextParser::parse_exponent() {
  skip_space();
  if (!at_end() && peek() == '-') fail("negative exponent");
  const std::size_t start = pos_;
  unsigned long value = 0;
  while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
    value = value * 10 + static_cast<unsigned long>(peek() - '0');
    if (value > 4096) fail("exponent too large");
    ++pos_;
  }
  if (pos_ == start) fail("expected a nonnegative integer exponent");
  return static_cast<unsigned>(value);
}

Rational TextParser::parse_unsigned_rational() {
  skip_space();
  const std::size_t start = pos_;
  while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
  if (pos_ == start) fail("expected a number");
  if (!at_end() && peek() == '.') fail("decimal literals are not accepted; write p/q");
  std::size_t end = pos_;
  if (!at_end() && peek() == '/') {
    ++pos_;
    const std::size_t den_start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (pos_ == den_start) fail("expected a denominator");
    end = pos_;
  }
  try {
    return parse_rational(text_.substr(start, end - start));
  } catch (const ParseError& e) {
    throw ParseError("invalid rational literal: " + e.detail(), start + e.position());
  }
}

Rational TextParser::parse_signed_rational() {
  skip_space();
  if (eat('-')) return -parse_unsigned_rational();
  return parse_unsigned_rational();
}

PiecewisePoly TextParser::parse_function() {
  skip_space();
  if (text_.substr(pos_, 9) != "piecewise") return PiecewisePoly(parse_poly_expr());
  pos_ += 9;
  expect('{');
  std::vector<Rational> bps;
  std::vector<Polynomial> pieces;
  for (;;) {
    skip_space();
    if (!eat('[') && !eat('(')) fail("expected '[' or '(' opening a piece interval");
    const Rational lo = parse_signed_rational();
    expect(',');
    const Rational hi = parse_signed_rational();
    skip_space();
    if (!eat(']') && !eat(')')) fail("expected ']' or ')' closing a piece interval");
    expect(':');
    if (bps.empty()) bps.push_back(lo);
    else if (bps.back() != lo) fail("piece intervals must be contiguous");
    bps.push_back(hi);
    pieces.push_back(parse_poly_expr());
    skip_space();
    if (eat(';')) continue;
    if (eat('}')) break;
    fail("expected ';' or '}' after a piece");
  }
  try {
    return PiecewisePoly(std::move(bps), std::move(pieces));
  } catch (const ArgumentError& e) {
    fail(e.what());
  }
}

void TextParser::skip_space() {
  while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
}

bool TextParser::eat(char c) {
  skip_space();
  if (!at_end() && peek() == c) {
    ++pos_;
    return true;
  }
  return false;
}

void TextParser::expect(char c) {
  if (!eat(c)) fail(std::string("expected '") + c + "'");
}

void TextParser::expect_end() {
  skip_space();
  if (!at_end()) fail(std::string("unexpected trailing '") + peek() + "'");
}

void TextParser::fail(const std::string& message) const { throw ParseError(message, pos_); }

Polynomial parse_polynomial(std::string_view text) {
  TextParser p(text);
  Polynomial result = p.parse_poly_expr();
  p.expect_end();
  return result;
}

PiecewisePoly parse_function(std::string_view text) {
  TextParser p(text);
  PiecewisePoly result = p.parse_function();
  p.expect_end();
  return result;
}

}  // namespace vdm
