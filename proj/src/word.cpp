#include "vdm/word.hpp"

#include "vdm/error.hpp"
#include "vdm/text_parser.hpp"

namespace vdm {

namespace {

bool same_letter(const Letter& a, const Letter& b) {
  return a.kind == b.kind && (a.kind != LetterKind::Coeff || a.coeff == b.coeff);
}

class WordParser {
 public:
  explicit WordParser(std::string_view text) : p_(text) {}

  WordSum run() {
    p_.skip_space();
    if (p_.at_end()) return WordSum::of(Word());
    WordSum out = expr();
    p_.skip_space();
    if (!p_.at_end()) p_.fail("unexpected character '" + std::string(1, p_.peek()) + "'");
    return out;
  }

 private:
  WordSum expr() {
    p_.skip_space();
    WordSum acc;
    bool negate = false;
    if (p_.eat('-')) negate = true;
    else p_.eat('+');
    acc = term();
    if (negate) acc *= Rational(-1);
    for (;;) {
      p_.skip_space();
      if (p_.eat('+')) {
        acc += term();
      } else if (p_.eat('-')) {
        WordSum t = term();
        t *= Rational(-1);
        acc += t;
      } else {
        return acc;
      }
    }
  }

  bool factor_starts() {
    p_.skip_space();
    if (p_.at_end()) return false;
    const char c = p_.peek();
    return c == 'X' || c == '[' || c == '(' || (c >= '0' && c <= '9');
  }

  WordSum term() {
    if (!factor_starts()) p_.fail("expected X, X*, [coefficient], a rational or '('");
    WordSum acc = factor();
    while (factor_starts()) acc = acc * factor();
    return acc;
  }

  WordSum factor() {
    p_.skip_space();
    const char c = p_.peek();
    WordSum base;
    if (c == 'X') {
      p_.advance();
      p_.skip_space();
      base = WordSum::of(p_.eat('*') ? Word::xstar() : Word::x());
    } else if (c == '[') {
      p_.advance();
      PiecewisePoly b = p_.parse_function();
      p_.expect(']');
      base = WordSum::of(Word::coefficient(std::move(b)));
    } else if (c == '(') {
      p_.advance();
      base = expr();
      p_.expect(')');
    } else {
      base = WordSum::of(Word::coefficient(PiecewisePoly::constant(p_.parse_unsigned_rational())));
    }
    p_.skip_space();
    if (p_.eat('^')) base = base.pow(p_.parse_exponent());
    return base;
  }

  TextParser p_;
};

}  // namespace

Word::Word(std::vector<Letter> letters) : letters_(std::move(letters)) { normalize(); }

Word Word::zero() {
  Word w;
  w.zero_ = true;
  return w;
}

void Word::normalize() {
  std::vector<Letter> out;
  for (auto& l : letters_) {
    if (l.kind == LetterKind::Coeff) {
      if (l.coeff.is_zero()) {
        letters_.clear();
        zero_ = true;
        return;
      }
      if (!out.empty() && out.back().kind == LetterKind::Coeff) {
        out.back().coeff *= l.coeff;
        if (out.back().coeff.is_one()) out.pop_back();
        continue;
      }
      if (l.coeff.is_one()) continue;
    }
    out.push_back(std::move(l));
  }
  letters_ = std::move(out);
}

int Word::matrix_letters() const {
  int n = 0;
  for (const auto& l : letters_) n += l.is_matrix() ? 1 : 0;
  return n;
}

StarPattern Word::star_pattern() const {
  StarPattern eps;
  for (const auto& l : letters_)
    if (l.is_matrix()) eps.star.push_back(l.kind == LetterKind::Xstar);
  return eps;
}

Word Word::adjoint() const {
  if (zero_) return zero();
  std::vector<Letter> out(letters_.rbegin(), letters_.rend());
  for (auto& l : out) {
    if (l.kind == LetterKind::X) l.kind = LetterKind::Xstar;
    else if (l.kind == LetterKind::Xstar) l.kind = LetterKind::X;
  }
  return Word(std::move(out));
}

Word operator*(const Word& a, const Word& b) {
  if (a.zero_ || b.zero_) return Word::zero();
  std::vector<Letter> letters = a.letters_;
  letters.insert(letters.end(), b.letters_.begin(), b.letters_.end());
  return Word(std::move(letters));
}

bool operator==(const Word& a, const Word& b) {
  if (a.zero_ != b.zero_ || a.letters_.size() != b.letters_.size()) return false;
  for (std::size_t i = 0; i < a.letters_.size(); ++i)
    if (!same_letter(a.letters_[i], b.letters_[i])) return false;
  return true;
}

std::string Word::to_string() const {
  if (zero_) return "0";
  if (letters_.empty()) return "1";
  std::string out;
  for (const auto& l : letters_) {
    if (!out.empty()) out += ' ';
    switch (l.kind) {
      case LetterKind::X: out += "X"; break;
      case LetterKind::Xstar: out += "X*"; break;
      case LetterKind::Coeff: out += "[" + l.coeff.to_string() + "]"; break;
    }
  }
  return out;
}

WordSum& WordSum::operator+=(const WordSum& o) {
  for (const auto& [c, w] : o.terms) {
    if (sgn(c) == 0 || w.is_zero()) continue;
    bool merged = false;
    for (auto& [c2, w2] : terms) {
      if (w2 == w) {
        c2 += c;
        merged = true;
        break;
      }
    }
    if (!merged) terms.emplace_back(c, w);
  }
  std::erase_if(terms, [](const auto& t) { return sgn(t.first) == 0; });
  return *this;
}

WordSum& WordSum::operator*=(const Rational& c) {
  if (sgn(c) == 0) terms.clear();
  for (auto& t : terms) t.first *= c;
  return *this;
}

WordSum operator*(const WordSum& a, const WordSum& b) {
  WordSum out;
  for (const auto& [ca, wa] : a.terms)
    for (const auto& [cb, wb] : b.terms) out += WordSum{{{ca * cb, wa * wb}}};
  return out;
}

WordSum WordSum::pow(unsigned k) const {
  WordSum out = WordSum::of(Word());
  for (unsigned i = 0; i < k; ++i) out = out * *this;
  return out;
}

std::string WordSum::to_string() const {
  if (terms.empty()) return "0";
  std::string out;
  for (const auto& [c, w] : terms) {
    if (!out.empty()) out += sgn(c) < 0 ? " - " : " + ";
    else if (sgn(c) < 0) out += "-";
    const Rational mag = abs(c);
    if (mag != 1) out += vdm::to_string(mag) + " ";
    out += w.to_string();
  }
  return out;
}

Word parse_word(std::string_view text) {
  WordSum s = WordParser(text).run();
  if (s.terms.empty()) return Word::zero();
  if (s.terms.size() != 1) throw ParseError("expected a single monomial, got a sum of " +
                                                std::to_string(s.terms.size()) + " words", 0);
  auto& [c, w] = s.terms.front();
  if (c == 1) return w;
  return Word::coefficient(PiecewisePoly::constant(c)) * w;
}

WordSum parse_word_expression(std::string_view text) { return WordParser(text).run(); }

}  // namespace vdm
