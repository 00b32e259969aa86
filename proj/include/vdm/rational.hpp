#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace vdm {

/// Exact rational number, always kept in lowest terms with a positive denominator.
using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "p", "-p" or "p/q"; throws ParseError on malformed text or a zero denominator.
Rational parse_rational(std::string_view text);

/// "p" for integers, "p/q" otherwise; inverse of parse_rational.
std::string to_string(const Rational& q);

double to_double(const Rational& q);

Rational factorial(unsigned k);

/// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t value);

}  // namespace vdm
