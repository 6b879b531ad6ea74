#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qg/combinatorics.hpp"
#include "qg/numeric.hpp"
#include "qg/rational.hpp"

namespace qg::ring {

/// Wraps an angle into [-pi, pi).
inline double wrap_angle(double phi) {
  double w = std::fmod(phi + kPi, 2 * kPi);
  if (w < 0) w += 2 * kPi;
  return w - kPi;
}

/// Single vertex on a loop: two directed bonds with independent phases and a
/// mixing angle eta at the vertex. eta = 0 is full transmission, eta = pi/2
/// full reflection, eta = pi/4 the symmetric point.
struct RingParams {
  double eta;
  double phi1;
  double phi2;

  explicit RingParams(double eta_, double phi1_ = 0.0, double phi2_ = 0.0)
      : eta(eta_), phi1(wrap_angle(phi1_)), phi2(wrap_angle(phi2_)) {
    if (!(eta_ >= 0.0 && eta_ <= kPi / 2))
      throw std::invalid_argument("RingParams: eta outside [0, pi/2]");
  }
};

/// 2x2 bond-scattering matrix diag(e^{i phi1}, e^{i phi2}) * sigma(eta) with
/// sigma = [[cos eta, i sin eta], [i sin eta, cos eta]].
inline Eigen::Matrix2cd bond_scattering(const RingParams& p) {
  const std::complex<double> i(0.0, 1.0);
  const double c = std::cos(p.eta);
  const double s = std::sin(p.eta);
  Eigen::Matrix2cd m;
  m << std::exp(i * p.phi1) * c, std::exp(i * p.phi1) * i * s,
      std::exp(i * p.phi2) * i * s, std::exp(i * p.phi2) * c;
  return m;
}

/// Gap between the two eigenphases: 2 arccos[cos eta cos((phi1-phi2)/2)],
/// in [0, 2 pi).
inline double eigenphase_gap(const RingParams& p) {
  const double c = std::cos(p.eta) * std::cos((p.phi1 - p.phi2) / 2);
  return 2.0 * std::acos(std::clamp(c, -1.0, 1.0));
}

/// Smooth part of the two-point eigenphase correlator R2(r; eta). The
/// 2-periodic delta spike is not discretised here; callers account for it
/// analytically. Exactly on the inverse-square-root singularity the value is
/// a tagged +infinity.
inline double correlator_smooth(double r, double eta) {
  if (!(r >= 0.0 && r <= 2.0))
    throw std::invalid_argument("correlator_smooth: r outside [0, 2]");
  if (!(eta >= 0.0 && eta <= kPi / 2))
    throw std::invalid_argument("correlator_smooth: eta outside [0, pi/2]");
  const double ce = std::cos(eta);
  const double cr = std::cos(kPi * r / 2);
  const double w = ce * ce - cr * cr;
  if (w == 0.0) return std::numeric_limits<double>::infinity();
  if (w < 0.0) return -1.0 / kPi;
  return -1.0 / kPi + std::sin(kPi * r / 2) / (2 * kPi * std::sqrt(w));
}

/// Smooth part after averaging eta over the flat transmission ensemble:
/// -1/pi + sin^2(pi r/2)/pi, the 2x2 CUE correlator.
inline double correlator_smooth_avg(double r) {
  if (!(r >= 0.0 && r <= 2.0))
    throw std::invalid_argument("correlator_smooth_avg: r outside [0, 2]");
  const double s = std::sin(kPi * r / 2);
  return (-1.0 + s * s) / kPi;
}

/// Form factor at eta = pi/4 from the spectral average:
/// 1 + (-1)^{m+n} C(2m,m)/2^{2m+1} - (3/2) delta_{n,0}, m = floor(n/2).
inline BigRational form_factor_exact(int n) {
  if (n < 0) throw std::invalid_argument("form_factor_exact: n >= 0");
  const int m = n / 2;
  BigRational v(1);
  BigRational term(binomial(2 * m, m), pow2(2 * m + 1));
  if ((m + n) % 2 != 0) term = -term;
  v += term;
  if (n == 0) v -= BigRational(3, 2);
  return v;
}

/// Large-n approximation 1 + (-1)^{m+n}/(2 sqrt(pi n)). Kept exactly in this
/// form; the exact oscillation tends to 1 -+ 1/sqrt(2 pi n), so the residual
/// error decays like 1/sqrt(n) but from a sqrt(2)-scaled amplitude
/// (about 0.018 at n = 40).
inline double form_factor_asymptotic(int n) {
  if (n < 1) throw std::invalid_argument("form_factor_asymptotic: n >= 1");
  const int m = n / 2;
  const double sign = ((m + n) % 2 == 0) ? 1.0 : -1.0;
  return 1.0 + sign / (2.0 * std::sqrt(kPi * n));
}

/// Form factor at eta = pi/4 from the orbit-family sum:
/// 1/2^n + 2^{-(n+1)} sum_{q=1}^{n-1} [(n/q) N(n-q,q)]^2.
/// Also evaluates the equivalent form 2^{-(n+1)} sum [N(q,n-q) +
/// (-1)^n N(n-q,q)]^2 and insists the two agree.
inline BigRational form_factor_po(int n) {
  if (n < 1) throw std::invalid_argument("form_factor_po: n >= 1");
  BigRational first(1, pow2(n));
  BigRational second = first;
  for (int q = 1; q < n; ++q) {
    const BigInt fwd = kravtchouk_integer(n - q, q);
    first += BigRational(BigInt(n) * n * fwd * fwd,
                         BigInt(q) * q * pow2(n + 1));
    BigInt mixed = kravtchouk_integer(q, n - q);
    mixed += (n % 2 == 0) ? fwd : -fwd;
    second += BigRational(mixed * mixed, pow2(n + 1));
  }
  if (first != second)
    throw std::runtime_error("form_factor_po: alternate binomial forms disagree");
  return first;
}

/// Orbit-family form factor at generic eta:
/// cos^{2n}(eta) + (n^2/2) sum_q [sum_v ((-1)^v/v) C(q-1,v-1) C(n-q-1,v-1)
///                                 sin^{2v} cos^{n-2v}]^2.
inline double form_factor_po_eta(int n, double eta) {
  if (n < 1) throw std::invalid_argument("form_factor_po_eta: n >= 1");
  const double c = std::cos(eta);
  const double s = std::sin(eta);
  double total = std::pow(c, 2 * n);
  for (int q = 1; q < n; ++q) {
    double inner = 0.0;
    for (int v = 1; v <= std::min(q, n - q); ++v) {
      const double b = to_double(binomial(q - 1, v - 1) * binomial(n - q - 1, v - 1));
      const double sign = (v % 2 == 0) ? 1.0 : -1.0;
      inner += sign * b / v * std::pow(s, 2 * v) * std::pow(c, n - 2 * v);
    }
    total += 0.5 * n * n * inner * inner;
  }
  return total;
}

/// 2x2 CUE form factor: 1/2 at n = 1, 1 for n >= 2.
inline BigRational form_factor_cue(int n) {
  if (n < 1) throw std::invalid_argument("form_factor_cue: n >= 1");
  return n == 1 ? BigRational(1, 2) : BigRational(1);
}

/// Orbit-family form factor averaged over the flat transmission ensemble
/// d mu(eta) = 2|cos eta sin eta| d eta. The eta integral reduces each
/// (v,v') cross term by the Beta integral, leaving the weight
/// n^2/(2(n+1)) C(n,v+v')^{-1}. Must reproduce form_factor_cue exactly.
inline BigRational form_factor_ensemble_po(int n) {
  if (n < 1) throw std::invalid_argument("form_factor_ensemble_po: n >= 1");
  BigRational total(1, n + 1);
  BigRational acc(0);
  for (int q = 1; q < n; ++q) {
    const int cap = std::min(q, n - q);
    for (int v = 1; v <= cap; ++v)
      for (int vp = 1; vp <= cap; ++vp) {
        const BigInt binoms = binomial(q - 1, v - 1) * binomial(n - q - 1, v - 1) *
                              binomial(q - 1, vp - 1) * binomial(n - q - 1, vp - 1);
        if (binoms == 0) continue;
        BigRational term(binoms, BigInt(v) * vp);
        term /= BigRational(binomial(n, v + vp));
        if ((v + vp) % 2 != 0) term = -term;
        acc += term;
      }
  }
  total += BigRational(BigInt(n) * n, BigInt(2) * (n + 1)) * acc;
  return total;
}

/// Coherent orbit-family amplitudes of the eta = pi/4 ring:
/// A(n,q) = coeff[q] / 2^{n/2} with integer coeff (the half power of two is
/// the only irrational factor, so equality checks stay exact).
struct AmplitudeTable {
  int n = 0;
  std::vector<BigInt> coeff;

  double value(int q) const {
    return to_double(coeff.at(q)) * std::pow(2.0, -n / 2.0);
  }
  BigRational square(int q) const {
    return BigRational(coeff.at(q) * coeff.at(q), pow2(n));
  }
  BigRational square_sum() const {
    BigRational s(0);
    for (int q = 0; q <= n; ++q) s += square(q);
    return s;
  }
};

/// A(n,0) = A(n,n) = 2^{-n/2}; A(n,q) = 2^{-n/2} (-1)^q (n/q) N(n-q,q) for
/// 0 < q < n. Each interior entry is cross-checked against the equivalent
/// rendering (-1)^{n+q} (n/q) C(n-1,n-q)^{1/2} P_{n-1,n-q}(q) via squares
/// and signs.
inline AmplitudeTable amplitude_table(int n) {
  if (n < 0) throw std::invalid_argument("amplitude_table: n >= 0");
  AmplitudeTable t;
  t.n = n;
  t.coeff.assign(n + 1, BigInt(0));
  t.coeff[0] = 1;
  t.coeff[n] = 1;
  for (int q = 1; q < n; ++q) {
    BigInt prod = BigInt(n) * kravtchouk_integer(n - q, q);
    if (prod % q != 0)
      throw std::runtime_error("amplitude_table: (n/q) N(n-q,q) not an integer");
    BigInt a = prod / q;
    if (q % 2 != 0) a = -a;
    const KravtchoukSquare kv = kravtchouk_square(
        {n - 1, n - q, q, BigRational(1, 2), BigRational(1, 2)});
    const BigRational lhs(a * a);
    const BigRational rhs = BigRational(BigInt(n) * n, BigInt(q) * q) *
                            BigRational(binomial(n - 1, n - q)) * kv.square;
    const int want_sign = ((n + q) % 2 == 0 ? 1 : -1) * kv.sum_sign;
    if (lhs != rhs || a.sign() != want_sign)
      throw std::runtime_error("amplitude_table: Kravtchouk rendering disagrees");
    t.coeff[q] = a;
  }
  return t;
}

/// tr S^n reconstructed from the family amplitudes:
/// sum_q A(n,q) e^{i(q phi1 + (n-q) phi2)}.
inline std::complex<double> trace_from_families(int n, double phi1, double phi2) {
  if (n < 1) throw std::invalid_argument("trace_from_families: n >= 1");
  const AmplitudeTable t = amplitude_table(n);
  const std::complex<double> i(0.0, 1.0);
  std::complex<double> acc(0.0, 0.0);
  for (int q = 0; q <= n; ++q)
    acc += t.value(q) * std::exp(i * (q * phi1 + (n - q) * phi2));
  return acc;
}

/// Abel-regularised trace autocorrelation
///   eps sum_{n=n0}^{horizon} e^{-n eps} sum_{q=0}^{n} A(n+nu,q+kappa) A(n,q),
/// which tends to the (kappa, nu-kappa) coefficient of the trace expansion
/// of tr S^nu as eps -> 0. Amplitude rows use the trace normalisation: the
/// zero-length row is {2} = tr S^0, so the nu = 0 limit is 2.
///
/// Negative n contribute nothing (the inner sum is empty), which is why the
/// limit cannot depend on n0.
class AbelTraceSum {
 public:
  AbelTraceSum(int nu, int kappa, long long horizon)
      : nu_(nu), kappa_(kappa), horizon_(horizon) {
    if (nu < 0 || kappa < 0 || kappa > nu)
      throw std::invalid_argument("AbelTraceSum: need 0 <= kappa <= nu");
    if (horizon < 1 || horizon > 200000)
      throw std::invalid_argument("AbelTraceSum: horizon outside [1, 2e5]");
    // rows are generated once in order; only the window needed by the
    // two-step recurrence and the nu-lagged dot product is kept
    const long long width = std::max(nu_, 2) + 1;
    std::vector<std::vector<double>> window(width);
    const double inv_sqrt2 = std::sqrt(0.5);
    c_.resize(horizon_ + 1);
    for (long long n = 0; n <= horizon_ + nu_; ++n) {
      auto& cur = window[n % width];
      if (n == 0) {
        cur = {2.0};
      } else if (n == 1) {
        cur = {inv_sqrt2, inv_sqrt2};
      } else {
        const auto& p1 = window[(n - 1) % width];
        const auto& p2 = window[(n - 2) % width];
        cur.assign(n + 1, 0.0);
        for (long long q = 0; q < n; ++q) cur[q] += p1[q];
        for (long long q = 1; q <= n; ++q) cur[q] += p1[q - 1];
        for (auto& x : cur) x *= inv_sqrt2;
        for (long long q = 1; q < n; ++q) cur[q] -= p2[q - 1];
      }
      if (n >= nu_ && n - nu_ <= horizon_) {
        const auto& lo = window[(n - nu_) % width];
        double dot = 0.0;
        for (long long q = 0; q <= n - nu_; ++q) dot += cur[q + kappa_] * lo[q];
        c_[n - nu_] = dot;
      }
    }
  }

  long long horizon() const { return horizon_; }

  /// The regularised sum at one (eps, n0). Throws when the horizon is too
  /// short for the requested eps (tail bound |c_n| <= 2.5 not negligible).
  double evaluate(double eps, long long n0 = 0) const {
    if (!(eps > 0)) throw std::invalid_argument("AbelTraceSum: eps > 0");
    const double tail =
        2.5 * eps * std::exp(-static_cast<double>(horizon_ + 1) * eps) /
        (1.0 - std::exp(-eps));
    if (tail > 1e-6)
      throw std::invalid_argument(
          "AbelTraceSum: horizon too small for eps, tail bound " +
          std::to_string(tail));
    double acc = 0.0;
    for (long long n = std::max<long long>(n0, 0); n <= horizon_; ++n)
      acc += std::exp(-static_cast<double>(n) * eps) * c_[n];
    return eps * acc;
  }

  /// The eps -> 0 limit: A(nu,kappa) for nu >= 1; tr S^0 = 2 at nu = 0.
  double target() const {
    if (nu_ == 0) return 2.0;
    return amplitude_table(nu_).value(kappa_);
  }

 private:
  int nu_;
  int kappa_;
  long long horizon_;
  std::vector<double> c_;
};

/// One-shot Abel sum; horizon defaults to ceil(40/eps).
inline double abel_trace_sum(int nu, int kappa, double eps, long long n0 = 0,
                             long long horizon = -1) {
  if (!(eps > 0)) throw std::invalid_argument("abel_trace_sum: eps > 0");
  if (horizon < 0) horizon = static_cast<long long>(std::ceil(40.0 / eps));
  return AbelTraceSum(nu, kappa, horizon).evaluate(eps, n0);
}

/// Classical return probability, spectral form: 1 + cos^n(2 eta).
inline double classical_return_exact(int n, double eta) {
  if (n < 1) throw std::invalid_argument("classical_return_exact: n >= 1");
  return 1.0 + std::pow(std::cos(2 * eta), n);
}

/// Classical return probability from the orbit families:
/// 2 cos^{2n} + sum_{q=1}^{n-1} sum_v (n/v) C(q-1,v-1) C(n-q-1,v-1)
///              sin^{4v} cos^{2n-4v}.
inline double classical_return_po(int n, double eta) {
  if (n < 1) throw std::invalid_argument("classical_return_po: n >= 1");
  const double c = std::cos(eta);
  const double s = std::sin(eta);
  double total = 2.0 * std::pow(c, 2 * n);
  for (int q = 1; q < n; ++q)
    for (int v = 1; v <= std::min(q, n - q); ++v) {
      const double b = to_double(binomial(q - 1, v - 1) * binomial(n - q - 1, v - 1));
      total += static_cast<double>(n) / v * b * std::pow(s, 4 * v) *
               std::pow(c, 2 * n - 4 * v);
    }
  return total;
}

/// Form factor at eta = pi/4 recovered by Fourier transforming the smooth
/// correlator over one period and adding the delta contributions
/// analytically: K(n) = 1 - 2 delta_{n,0} + pi I(n) with
/// I(n) = int_{1/2}^{3/2} theta-part(r) cos(n pi r) dr.
/// The substitutions r = 1/2 + u^2 and r = 3/2 - u^2 remove the
/// inverse-square-root endpoints; on either side -cos(pi r) = sin(pi u^2)
/// exactly, so the transformed integrand is analytic.
inline double form_factor_fourier(int n, double tol = 1e-8) {
  if (n < 0) throw std::invalid_argument("form_factor_fourier: n >= 0");
  const auto transformed = [n](double r, double u) {
    const double u2 = u * u;
    const double ratio = u2 == 0.0 ? kPi : std::sin(kPi * u2) / u2;
    return std::sin(kPi * r / 2) * std::cos(n * kPi * r) /
           (kPi * std::sqrt(ratio / 2.0));
  };
  const double half = std::sqrt(0.5);
  const QuadratureResult left = integrate_adaptive(
      [&](double u) { return transformed(0.5 + u * u, u); }, 0.0, half, tol / 8);
  const QuadratureResult right = integrate_adaptive(
      [&](double u) { return transformed(1.5 - u * u, u); }, 0.0, half, tol / 8);
  return (n == 0 ? -1.0 : 1.0) + kPi * (left.value + right.value);
}

enum class FormFactorMethod { exact, po, approx, cue, mc, quadrature };

inline const char* method_name(FormFactorMethod m) {
  switch (m) {
    case FormFactorMethod::exact: return "exact";
    case FormFactorMethod::po: return "po";
    case FormFactorMethod::approx: return "approx";
    case FormFactorMethod::cue: return "cue";
    case FormFactorMethod::mc: return "mc";
    case FormFactorMethod::quadrature: return "quadrature";
  }
  return "?";
}

struct FormFactorEntry {
  int n = 0;
  FormFactorMethod method = FormFactorMethod::exact;
  bool has_exact = false;
  BigRational exact;
  double value = 0;
  double std_error = 0;
};

/// The four ring curves (exact, po, approx, cue) for n in [n_min, n_max].
/// exact and po rows must agree exactly for shared n.
inline std::vector<FormFactorEntry> form_factor_table(int n_min, int n_max) {
  if (n_min < 1 || n_max < n_min)
    throw std::invalid_argument("form_factor_table: need 1 <= n_min <= n_max");
  std::vector<FormFactorEntry> rows;
  for (int n = n_min; n <= n_max; ++n) {
    const BigRational exact = form_factor_exact(n);
    const BigRational po = form_factor_po(n);
    if (exact != po)
      throw std::runtime_error("form_factor_table: exact and po rows disagree");
    rows.push_back({n, FormFactorMethod::exact, true, exact, to_double(exact), 0});
    rows.push_back({n, FormFactorMethod::po, true, po, to_double(po), 0});
    rows.push_back({n, FormFactorMethod::approx, false, BigRational(0),
                    form_factor_asymptotic(n), 0});
    const BigRational cue = form_factor_cue(n);
    rows.push_back({n, FormFactorMethod::cue, true, cue, to_double(cue), 0});
  }
  return rows;
}

}  // namespace qg::ring
