#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace qg {

/// Arbitrary-precision signed integer.
using BigInt = boost::multiprecision::cpp_int;

/// Arbitrary-precision rational. Always stored reduced with a positive
/// denominator; the canonical zero is 0/1.
using BigRational = boost::multiprecision::cpp_rational;

inline double to_double(const BigRational& x) {
  return x.convert_to<double>();
}

inline double to_double(const BigInt& x) {
  return x.convert_to<double>();
}

/// Exact "p/q" rendering (reduced form, q > 0).
inline std::string fraction_string(const BigRational& x) {
  return numerator(x).str() + "/" + denominator(x).str();
}

/// 2^k as an exact integer, k >= 0.
inline BigInt pow2(unsigned k) {
  return BigInt(1) << k;
}

/// x^e for e >= 0.
inline BigRational rational_pow(const BigRational& x, unsigned e) {
  BigRational acc(1);
  BigRational base = x;
  for (; e != 0; e >>= 1) {
    if (e & 1u) acc *= base;
    if (e > 1) base *= base;
  }
  return acc;
}

}  // namespace qg
