// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_RATIONAL_HPP_
#define TSM_RATIONAL_HPP_

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tsm {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

// Exact "p/q" text, or "p" for integers.
inline std::string to_string(const Rational& q) { return q.str(); }

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline std::string to_decimal(const Rational& q, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << to_double(q);
  return os.str();
}

// Accepts "3", "-3", "3/4", "0.25", "1e-3" is rejected.
inline bool try_parse_rational(std::string_view text, Rational* out) {
  if (text.empty()) return false;
  std::string s(text);
  bool negative = false;
  size_t pos = 0;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    pos = 1;
  }
  auto all_digits = [](const std::string& t) {
    if (t.empty()) return false;
    for (char c : t) {
      if (c < '0' || c > '9') return false;
    }
    return true;
  };
  std::string body = s.substr(pos);
  Rational value;
  if (auto slash = body.find('/'); slash != std::string::npos) {
    std::string num = body.substr(0, slash);
    std::string den = body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) return false;
    Integer d(den);
    if (d == 0) return false;
    value = Rational(Integer(num), d);
  } else if (auto dot = body.find('.'); dot != std::string::npos) {
    std::string whole = body.substr(0, dot);
    std::string frac = body.substr(dot + 1);
    if (whole.empty()) whole = "0";
    if (!all_digits(whole) || !all_digits(frac)) return false;
    Integer scale = 1;
    for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
    value = Rational(Integer(whole)) + Rational(Integer(frac), scale);
  } else {
    if (!all_digits(body)) return false;
    value = Rational(Integer(body));
  }
  *out = negative ? Rational(-value) : value;
  return true;
}

inline Rational parse_rational(std::string_view text) {
  Rational q;
  if (!try_parse_rational(text, &q)) {
    throw std::invalid_argument("not a rational: '" + std::string(text) + "'");
  }
  return q;
}

inline Rational rational(std::int64_t num, std::int64_t den = 1) {
  return Rational(num, den);
}

}  // namespace tsm

#endif  // TSM_RATIONAL_HPP_
