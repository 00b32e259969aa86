#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "vdm/funcspace.hpp"

namespace vdm {

/// Recursive-descent scanner shared by the polynomial and word grammars.
class TextParser {
 public:
  explicit TextParser(std::string_view text, std::size_t pos = 0) : text_(text), pos_(pos) {}

  Polynomial parse_poly_expr();
  PiecewisePoly parse_function();
  Rational parse_unsigned_rational();
  Rational parse_signed_rational();
  unsigned parse_exponent();

  void skip_space();
  bool eat(char c);
  void expect(char c);
  void expect_end();
  [[noreturn]] void fail(const std::string& message) const;

  bool at_end() const noexcept { return pos_ >= text_.size(); }
  char peek() const noexcept { return text_[pos_]; }
  std::size_t position() const noexcept { return pos_; }
  void advance(std::size_t k = 1) noexcept { pos_ += k; }
  std::string_view text() const noexcept { return text_; }

 private:
  Polynomial parse_poly_term();
  Polynomial parse_poly_unary();
  Polynomial parse_poly_primary();

  std::string_view text_;
  std::size_t pos_;
};

}  // namespace vdm
