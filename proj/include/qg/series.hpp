#pragma once

#include <algorithm>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "qg/combinatorics.hpp"
#include "qg/rational.hpp"

namespace qg {

/// Truncated power series in one variable with exact rational coefficients.
/// Arithmetic between different orders truncates to the shorter operand;
/// nothing ever extends an order silently.
class Series1 {
 public:
  explicit Series1(int order) : c_(checked(order) + 1) {}

  static Series1 constant(int order, const BigRational& value) {
    Series1 s(order);
    s.c_[0] = value;
    return s;
  }

  /// Polynomial with the given low-order coefficients, rest zero.
  static Series1 polynomial(int order, std::initializer_list<long long> coeff) {
    Series1 s(order);
    int i = 0;
    for (long long v : coeff) {
      if (i > order) break;
      s.c_[i++] = v;
    }
    return s;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  const BigRational& operator[](int i) const { return c_.at(i); }
  BigRational& operator[](int i) { return c_.at(i); }

  friend Series1 operator+(const Series1& a, const Series1& b) {
    Series1 r(std::min(a.order(), b.order()));
    for (int i = 0; i <= r.order(); ++i) r.c_[i] = a.c_[i] + b.c_[i];
    return r;
  }

  friend Series1 operator-(const Series1& a, const Series1& b) {
    Series1 r(std::min(a.order(), b.order()));
    for (int i = 0; i <= r.order(); ++i) r.c_[i] = a.c_[i] - b.c_[i];
    return r;
  }

  friend Series1 operator-(const Series1& a) {
    Series1 r(a.order());
    for (int i = 0; i <= r.order(); ++i) r.c_[i] = -a.c_[i];
    return r;
  }

  friend Series1 operator*(const Series1& a, const Series1& b) {
    Series1 r(std::min(a.order(), b.order()));
    for (int i = 0; i <= r.order(); ++i) {
      if (a.c_[i].is_zero()) continue;
      for (int j = 0; i + j <= r.order(); ++j) {
        if (b.c_[j].is_zero()) continue;
        r.c_[i + j] += a.c_[i] * b.c_[j];
      }
    }
    return r;
  }

  friend Series1 operator*(const BigRational& s, const Series1& a) {
    Series1 r(a.order());
    for (int i = 0; i <= r.order(); ++i) r.c_[i] = s * a.c_[i];
    return r;
  }

  friend bool operator==(const Series1& a, const Series1& b) {
    return a.c_ == b.c_;
  }

  /// Multiplicative inverse: (*this) * reciprocal() == 1 through the order.
  Series1 reciprocal() const {
    if (c_[0].is_zero())
      throw std::domain_error("Series1::reciprocal: zero constant term");
    Series1 r(order());
    r.c_[0] = 1 / c_[0];
    for (int n = 1; n <= order(); ++n) {
      BigRational acc(0);
      for (int k = 1; k <= n; ++k) acc += c_[k] * r.c_[n - k];
      r.c_[n] = -acc / c_[0];
    }
    return r;
  }

  /// r with r^2 * (*this) == 1 through the order; constant term must be 1.
  Series1 inverse_sqrt() const {
    if (c_[0] != 1)
      throw std::domain_error("Series1::inverse_sqrt: constant term must be 1");
    const Series1 inv = reciprocal();
    Series1 r(order());
    r.c_[0] = 1;
    for (int n = 1; n <= order(); ++n) {
      BigRational acc(0);
      for (int j = 1; j < n; ++j) acc += r.c_[j] * r.c_[n - j];
      r.c_[n] = (inv.c_[n] - acc) / 2;
    }
    return r;
  }

  /// Substitution x -> -x.
  Series1 negate_variable() const {
    Series1 r(order());
    for (int i = 0; i <= order(); ++i) r.c_[i] = (i % 2 == 0) ? c_[i] : -c_[i];
    return r;
  }

 private:
  static int checked(int order) {
    if (order < 0) throw std::invalid_argument("Series1: negative order");
    return order;
  }
  std::vector<BigRational> c_;
};

/// Bivariate series truncated by total degree: coefficients of x^s y^t with
/// s + t <= order. Missing entries are zero.
class Series2 {
 public:
  explicit Series2(int order) : order_(order) {
    if (order < 0) throw std::invalid_argument("Series2: negative order");
    c_.resize(static_cast<size_t>(order + 1) * (order + 2) / 2);
  }

  int order() const { return order_; }

  const BigRational& at(int s, int t) const { return c_[index(s, t)]; }
  BigRational& at(int s, int t) { return c_[index(s, t)]; }

  friend Series2 operator+(const Series2& a, const Series2& b) {
    Series2 r(std::min(a.order_, b.order_));
    for (int d = 0; d <= r.order_; ++d)
      for (int t = 0; t <= d; ++t) r.at(d - t, t) = a.at(d - t, t) + b.at(d - t, t);
    return r;
  }

  friend Series2 operator*(const Series2& a, const Series2& b) {
    Series2 r(std::min(a.order_, b.order_));
    for (int d1 = 0; d1 <= r.order_; ++d1)
      for (int t1 = 0; t1 <= d1; ++t1) {
        const BigRational& av = a.at(d1 - t1, t1);
        if (av.is_zero()) continue;
        for (int d2 = 0; d1 + d2 <= r.order_; ++d2)
          for (int t2 = 0; t2 <= d2; ++t2) {
            const BigRational& bv = b.at(d2 - t2, t2);
            if (bv.is_zero()) continue;
            r.at(d1 - t1 + d2 - t2, t1 + t2) += av * bv;
          }
      }
    return r;
  }

  friend bool operator==(const Series2& a, const Series2& b) {
    return a.order_ == b.order_ && a.c_ == b.c_;
  }

  Series2 reciprocal() const {
    if (at(0, 0).is_zero())
      throw std::domain_error("Series2::reciprocal: zero constant term");
    Series2 r(order_);
    r.at(0, 0) = 1 / at(0, 0);
    for (int d = 1; d <= order_; ++d)
      for (int t = 0; t <= d; ++t) {
        const int s = d - t;
        BigRational acc(0);
        for (int i = 0; i <= s; ++i)
          for (int j = 0; j <= t; ++j) {
            if (i == 0 && j == 0) continue;
            if (at(i, j).is_zero()) continue;
            acc += at(i, j) * r.at(s - i, t - j);
          }
        r.at(s, t) = -acc / at(0, 0);
      }
    return r;
  }

 private:
  size_t index(int s, int t) const {
    if (s < 0 || t < 0 || s + t > order_)
      throw std::out_of_range("Series2: monomial outside truncation");
    const int d = s + t;
    return static_cast<size_t>(d) * (d + 1) / 2 + t;
  }

  int order_;
  std::vector<BigRational> c_;
};

// ---------------------------------------------------------------------------
// Generating functions of the integer Kravtchouk values N(s,t).
// Each comes in two independently computed flavours, a double sum over (s,t)
// and an expanded closed form; equality through the truncation order is the
// identity under test.
// ---------------------------------------------------------------------------

/// sum_{s,t>=1} N(s,t)^2 x^{s+t}.
inline Series1 kravtchouk_square_gf_po(int order) {
  if (order < 2) throw std::invalid_argument("kravtchouk_square_gf_po: order >= 2");
  Series1 g(order);
  for (int s = 1; s < order; ++s)
    for (int t = 1; s + t <= order; ++t) {
      const BigInt v = kravtchouk_integer(s, t);
      g[s + t] += BigRational(v * v);
    }
  return g;
}

/// x/(2x-1) [ (4x^2+1)^{-1/2} - 1/(1-x) ].
inline Series1 kravtchouk_square_gf_closed(int order) {
  if (order < 2) throw std::invalid_argument("kravtchouk_square_gf_closed: order >= 2");
  const Series1 x = Series1::polynomial(order, {0, 1});
  const Series1 root = Series1::polynomial(order, {1, 0, 4}).inverse_sqrt();
  const Series1 geom = Series1::polynomial(order, {1, -1}).reciprocal();
  return x * Series1::polynomial(order, {-1, 2}).reciprocal() * (root - geom);
}

/// sum_{s,t>=1} N(s,t) N(t,s) x^{s+t}.
inline Series1 kravtchouk_cross_gf_po(int order) {
  if (order < 2) throw std::invalid_argument("kravtchouk_cross_gf_po: order >= 2");
  Series1 g(order);
  for (int s = 1; s < order; ++s)
    for (int t = 1; s + t <= order; ++t)
      g[s + t] += BigRational(kravtchouk_integer(s, t) * kravtchouk_integer(t, s));
  return g;
}

/// (1/2) (4x^2+2x+1) / [(2x+1) sqrt(4x^2+1)] - 1/2.
inline Series1 kravtchouk_cross_gf_closed(int order) {
  if (order < 2) throw std::invalid_argument("kravtchouk_cross_gf_closed: order >= 2");
  const Series1 num = Series1::polynomial(order, {1, 2, 4});
  const Series1 den = Series1::polynomial(order, {1, 2}).reciprocal() *
                      Series1::polynomial(order, {1, 0, 4}).inverse_sqrt();
  return BigRational(1, 2) * (num * den) -
         Series1::constant(order, BigRational(1, 2));
}

/// sum_{s,t>=1} N(s,t) x^s y^t.
inline Series2 kravtchouk_gf2_po(int order) {
  if (order < 2) throw std::invalid_argument("kravtchouk_gf2_po: order >= 2");
  Series2 g(order);
  for (int s = 1; s < order; ++s)
    for (int t = 1; s + t <= order; ++t)
      g.at(s, t) = BigRational(kravtchouk_integer(s, t));
  return g;
}

/// xy / [(1+y)(1-x+y-2xy)].
inline Series2 kravtchouk_gf2_closed(int order) {
  if (order < 2) throw std::invalid_argument("kravtchouk_gf2_closed: order >= 2");
  Series2 one_plus_y(order);
  one_plus_y.at(0, 0) = 1;
  one_plus_y.at(0, 1) = 1;
  Series2 kernel(order);
  kernel.at(0, 0) = 1;
  kernel.at(1, 0) = -1;
  kernel.at(0, 1) = 1;
  kernel.at(1, 1) = -2;
  Series2 xy(order);
  xy.at(1, 1) = 1;
  return xy * (one_plus_y * kernel).reciprocal();
}

/// Form-factor generating function, spectral route:
/// (1/2)(1-2x)/sqrt(1+4x^2) - (1/2)(1-6x)/(1-2x).
inline Series1 form_factor_gf_spectral(int order) {
  if (order < 1) throw std::invalid_argument("form_factor_gf_spectral: order >= 1");
  const Series1 a = BigRational(1, 2) * (Series1::polynomial(order, {1, -2}) *
                                         Series1::polynomial(order, {1, 0, 4}).inverse_sqrt());
  const Series1 b = BigRational(1, 2) * (Series1::polynomial(order, {1, -6}) *
                                         Series1::polynomial(order, {1, -2}).reciprocal());
  return a - b;
}

/// Form-factor generating function, orbit route:
/// x/(1-x) + G1(x) + G2(-x) with G1, G2 the double sums above.
inline Series1 form_factor_gf_po(int order) {
  if (order < 1) throw std::invalid_argument("form_factor_gf_po: order >= 1");
  Series1 g = Series1::polynomial(order, {0, 1}) *
              Series1::polynomial(order, {1, -1}).reciprocal();
  if (order >= 2)
    g = g + kravtchouk_square_gf_po(order) +
        kravtchouk_cross_gf_po(order).negate_variable();
  return g;
}

}  // namespace qg
