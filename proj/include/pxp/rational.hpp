#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

namespace pxp {

// Exact arbitrary-precision rational; all relation algebra runs over these,
// never over floating point.
using Rational = boost::multiprecision::cpp_rational;

inline std::string rational_to_string(const Rational& q) {
  const auto num = numerator(q);
  const auto den = denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline Rational rational_from_string(const std::string& s) {
  const auto slash = s.find('/');
  using Int = boost::multiprecision::cpp_int;
  if (slash == std::string::npos) return Rational(Int(s));
  return Rational(Int(s.substr(0, slash)), Int(s.substr(slash + 1)));
}

}  // namespace pxp
