#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vdm/funcspace.hpp"
#include "vdm/partitions.hpp"

namespace vdm {

enum class LetterKind { X, Xstar, Coeff };

struct Letter {
  LetterKind kind;
  PiecewisePoly coeff;  // used only by Coeff letters

  static Letter x() { return {LetterKind::X, {}}; }
  static Letter xstar() { return {LetterKind::Xstar, {}}; }
  static Letter coefficient(PiecewisePoly b) { return {LetterKind::Coeff, std::move(b)}; }
  bool is_matrix() const noexcept { return kind != LetterKind::Coeff; }
};

/// Monomial in X, X* and coefficients from C[0,1]. Always kept normalized:
/// no two adjacent coefficients, no coefficient equal to 1, and a zero coefficient
/// collapses the whole word to zero.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<Letter> letters);

  static Word zero();
  static Word coefficient(PiecewisePoly b) { return Word({Letter::coefficient(std::move(b))}); }
  static Word x() { return Word({Letter::x()}); }
  static Word xstar() { return Word({Letter::xstar()}); }

  const std::vector<Letter>& letters() const noexcept { return letters_; }
  bool is_zero() const noexcept { return zero_; }
  int matrix_letters() const;
  StarPattern star_pattern() const;

  /// Reversed word with X and X* exchanged (coefficients are real, so unchanged).
  Word adjoint() const;

  friend Word operator*(const Word& a, const Word& b);
  friend bool operator==(const Word& a, const Word& b);

  /// Grammar text: tokens X, X*, [poly] separated by spaces; "0" for the zero word, "1" for the empty word.
  std::string to_string() const;

 private:
  void normalize();
  std::vector<Letter> letters_;
  bool zero_ = false;
};

/// Finite rational linear combination of words.
struct WordSum {
  std::vector<std::pair<Rational, Word>> terms;

  static WordSum of(Word w) { return WordSum{{{Rational(1), std::move(w)}}}; }
  WordSum& operator+=(const WordSum& o);
  WordSum& operator*=(const Rational& c);
  friend WordSum operator*(const WordSum& a, const WordSum& b);
  WordSum pow(unsigned k) const;
  std::string to_string() const;
};

/// Parses a single monomial: tokens X, X*, [poly], rationals and (..)^k groups. Sums are rejected.
Word parse_word(std::string_view text);
/// Parses a word expression that may contain + and - at any level.
WordSum parse_word_expression(std::string_view text);

}  // namespace vdm
