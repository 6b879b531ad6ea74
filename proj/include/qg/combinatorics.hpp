#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "qg/rational.hpp"

namespace qg {

namespace detail {

// Pascal triangle memo. Built once on first use; immutable afterwards, so
// concurrent readers are fine.
inline const std::vector<std::vector<BigInt>>& pascal_table() {
  static const std::vector<std::vector<BigInt>> table = [] {
    constexpr int kRows = 256;
    std::vector<std::vector<BigInt>> t(kRows + 1);
    t[0] = {BigInt(1)};
    for (int n = 1; n <= kRows; ++n) {
      t[n].resize(n + 1);
      t[n][0] = 1;
      t[n][n] = 1;
      for (int k = 1; k < n; ++k) t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
    }
    return t;
  }();
  return table;
}

}  // namespace detail

/// C(n,k) as an exact integer. Zero whenever k < 0, n < 0 or k > n: several
/// of the identity sums run their index past the nonzero support and rely on
/// those terms vanishing.
inline BigInt binomial(long long n, long long k) {
  if (n < 0 || k < 0 || k > n) return BigInt(0);
  const auto& table = detail::pascal_table();
  if (n < static_cast<long long>(table.size())) return table[n][k];
  k = std::min(k, n - k);
  BigInt acc(1);
  for (long long i = 1; i <= k; ++i) {
    acc *= n - k + i;
    acc /= i;
  }
  return acc;
}

/// N(s,t) = sum_{v=1}^{min(s,t)} (-1)^{t-v} C(t,v) C(s-1,v-1) for s,t >= 1.
/// An integer-valued rescaling of a symmetric-weight Kravtchouk polynomial;
/// it is the coherent orbit-family amplitude of the single-loop graph up to
/// sign and a power of sqrt(2).
inline BigInt kravtchouk_integer(int s, int t) {
  if (s <= 0 || t <= 0)
    throw std::invalid_argument("kravtchouk_integer: s and t must be positive");
  BigInt acc(0);
  for (int v = 1; v <= std::min(s, t); ++v) {
    BigInt term = binomial(t, v) * binomial(s - 1, v - 1);
    if ((t - v) % 2 != 0) term = -term;
    acc += term;
  }
  return acc;
}

/// Parameters of a Kravtchouk polynomial P_{N,k}(x) with weights (u,v),
/// u + v = 1, 0 < u < 1, 0 <= k <= N, 0 <= x <= N.
struct KravtchoukSpec {
  int N = 0;
  int k = 0;
  int x = 0;
  BigRational u{1, 2};
  BigRational v{1, 2};
};

/// P_{N,k}(x)^2 plus the sign of the alternating sum. Working with the
/// square keeps everything rational: the normalisation prefactor
/// [C(N,k)(uv)^k]^{-1/2} is irrational, but every use pairs or squares it.
struct KravtchoukSquare {
  BigRational square;
  int sum_sign = 0;  // -1, 0, +1
};

inline KravtchoukSquare kravtchouk_square(const KravtchoukSpec& spec) {
  if (spec.N < 0 || spec.k < 0 || spec.k > spec.N || spec.x < 0 || spec.x > spec.N)
    throw std::invalid_argument("kravtchouk_square: need 0 <= k <= N and 0 <= x <= N");
  if (spec.u + spec.v != 1 || spec.u <= 0 || spec.u >= 1)
    throw std::invalid_argument("kravtchouk_square: weights must satisfy u + v = 1, 0 < u < 1");
  BigRational sum(0);
  for (int v = 0; v <= spec.k; ++v) {
    BigInt b = binomial(spec.x, v) * binomial(spec.N - spec.x, spec.k - v);
    if (b == 0) continue;
    BigRational term = BigRational(b) * rational_pow(spec.u, spec.k - v) *
                       rational_pow(spec.v, v);
    if ((spec.k - v) % 2 != 0) term = -term;
    sum += term;
  }
  KravtchoukSquare out;
  out.sum_sign = sum.sign();
  out.square = sum * sum /
               (BigRational(binomial(spec.N, spec.k)) *
                rational_pow(spec.u * spec.v, spec.k));
  return out;
}

/// Checks N(s,t)^2 = C(s+t-1,s) P_{s+t-1,s}(t)^2 at u = v = 1/2, and that
/// sgn N(s,t) = (-1)^{s+t} sgn of the Kravtchouk alternating sum.
inline bool kravtchouk_integer_consistent(int s, int t) {
  const BigInt n = kravtchouk_integer(s, t);
  const KravtchoukSquare kv =
      kravtchouk_square({s + t - 1, s, t, BigRational(1, 2), BigRational(1, 2)});
  if (BigRational(n * n) != BigRational(binomial(s + t - 1, s)) * kv.square)
    return false;
  const int lhs_sign = n.sign();
  const int rhs_sign = ((s + t) % 2 == 0 ? 1 : -1) * kv.sum_sign;
  return lhs_sign == rhs_sign;
}

/// sum_{q=1}^{n-1} C(q-1,v-1) C(n-q-1,v-1) = C(n-1,2v-1) = (2v/n) C(n,2v).
/// Counts pairs of compositions; equivalently the number of closed loop
/// itineraries with 2v direction reversals.
inline bool composition_convolution_identity(int n, int nu) {
  if (n < 2 || nu < 1)
    throw std::invalid_argument("composition_convolution_identity: need n >= 2, nu >= 1");
  BigInt lhs(0);
  for (int q = 1; q < n; ++q)
    lhs += binomial(q - 1, nu - 1) * binomial(n - q - 1, nu - 1);
  const BigInt rhs = binomial(n - 1, 2 * nu - 1);
  const BigRational scaled = BigRational(2 * nu, n) * BigRational(binomial(n, 2 * nu));
  return lhs == rhs && BigRational(rhs) == scaled;
}

/// Phase-averaged weight of an orbit pair with v and v' reversal blocks:
/// F_{v,v'}(n,q) = [(n-1)n/2] [(-1)^{v+v'}/(v v')] C(n,v+v')^{-1}
///                 C(q-1,v-1) C(q-1,v'-1) C(n-q-1,v-1) C(n-q-1,v'-1).
inline BigRational orbit_pair_weight(int n, int q, int nu, int nup) {
  if (q < 1 || q >= n)
    throw std::invalid_argument("orbit_pair_weight: need 1 <= q <= n-1");
  if (nu < 1 || nup < 1)
    throw std::invalid_argument("orbit_pair_weight: need nu, nu' >= 1");
  const BigInt binoms = binomial(q - 1, nu - 1) * binomial(q - 1, nup - 1) *
                        binomial(n - q - 1, nu - 1) * binomial(n - q - 1, nup - 1);
  if (binoms == 0) return BigRational(0);
  // binoms != 0 forces nu + nup <= n, so C(n, nu+nup) > 0.
  BigRational w(BigInt(n - 1) * n * binoms, BigInt(2) * nu * nup);
  w /= BigRational(binomial(n, nu + nup));
  if ((nu + nup) % 2 != 0) w = -w;
  return w;
}

/// S(n,q) = sum of orbit_pair_weight over 1 <= v,v' <= min(q, n-q).
/// Equals 1 exactly for every 1 <= q < n.
inline BigRational orbit_pair_weight_sum(int n, int q) {
  if (q < 1 || q >= n)
    throw std::invalid_argument("orbit_pair_weight_sum: need 1 <= q <= n-1");
  const int cap = std::min(q, n - q);
  BigRational acc(0);
  for (int nu = 1; nu <= cap; ++nu)
    for (int nup = 1; nup <= cap; ++nup) acc += orbit_pair_weight(n, q, nu, nup);
  return acc;
}

/// q^2 F(n,q) - (n-q-1)^2 F(n,q+1) + (n-1)(n-2q-1) F(n+1,q+1).
/// Identically zero; this three-term relation is what reduces the weight-sum
/// identity to finitely many base cases.
inline BigRational orbit_pair_recursion_residual(int n, int q, int nu, int nup) {
  if (q < 1 || q > n - 2)
    throw std::invalid_argument(
        "orbit_pair_recursion_residual: need 1 <= q <= n-2 so all three terms exist");
  BigRational r = BigRational(BigInt(q) * q) * orbit_pair_weight(n, q, nu, nup);
  r -= BigRational(BigInt(n - q - 1) * (n - q - 1)) * orbit_pair_weight(n, q + 1, nu, nup);
  r += BigRational(BigInt(n - 1) * (n - 2 * q - 1)) * orbit_pair_weight(n + 1, q + 1, nu, nup);
  return r;
}

enum class Parity { even, odd };

struct MomentCheck {
  BigInt lhs;
  BigInt rhs;
  bool equal = false;
};

/// Closed form for n^2 sum_{q=1}^{n-1} (N(n-q,q)/q)^2 with n = 2m (even) or
/// n = 2m+1 (odd):
///   even: 2^{2m+1} + (-1)^m C(2m,m) - 2
///   odd : 2^{2m+2} - 2 (-1)^m C(2m,m) - 2
/// The left side is evaluated twice, from N(n-q,q) and from the equivalent
/// binomial-weighted Kravtchouk squares; the two routes must agree.
inline MomentCheck kravtchouk_moment_check(int m, Parity parity) {
  if (m < 1) throw std::invalid_argument("kravtchouk_moment_check: need m >= 1");
  const int n = parity == Parity::even ? 2 * m : 2 * m + 1;
  BigRational lhs_n(0);
  BigRational lhs_kr(0);
  for (int q = 1; q < n; ++q) {
    const BigInt t = kravtchouk_integer(n - q, q);
    lhs_n += BigRational(t * t, BigInt(q) * q);
    const KravtchoukSquare kv = kravtchouk_square(
        {n - 1, n - q, q, BigRational(1, 2), BigRational(1, 2)});
    lhs_kr += BigRational(binomial(n - 1, n - q) * n * n, BigInt(q) * q) * kv.square;
  }
  lhs_n *= BigInt(n) * n;
  if (lhs_n != lhs_kr)
    throw std::runtime_error("kravtchouk_moment_check: alternate evaluations disagree");
  if (denominator(lhs_n) != 1)
    throw std::runtime_error("kravtchouk_moment_check: left side is not an integer");

  MomentCheck out;
  out.lhs = numerator(lhs_n);
  const BigInt central = binomial(2 * m, m);
  const BigInt sign = (m % 2 == 0) ? BigInt(1) : BigInt(-1);
  out.rhs = parity == Parity::even ? pow2(2 * m + 1) + sign * central - 2
                                   : pow2(2 * m + 2) - 2 * sign * central - 2;
  out.equal = out.lhs == out.rhs;
  return out;
}

}  // namespace qg
