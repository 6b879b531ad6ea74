#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qg {

inline constexpr double kPi = std::numbers::pi;

/// splitmix64 output for stream position `index` of stream `seed`.
/// Counter-based: any sample can be generated independently of the others,
/// so parallel or reordered consumers reproduce the same values.
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Uniform double in [0,1) at stream position `index`.
inline double uniform_at(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(splitmix64_at(seed, index) >> 11) * 0x1.0p-53;
}

struct QuadratureResult {
  double value = 0;
  double error_estimate = 0;
};

namespace detail {

template <typename F>
QuadratureResult simpson_recurse(const F& f, double a, double b, double fa,
                                 double fm, double fb, double whole, double tol,
                                 int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return {left + right + delta / 15.0, std::abs(delta) / 15.0};
  const QuadratureResult l =
      simpson_recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1);
  const QuadratureResult r =
      simpson_recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
  return {l.value + r.value, l.error_estimate + r.error_estimate};
}

}  // namespace detail

/// Adaptive Simpson quadrature on [a,b]. The integrand must be finite on the
/// closed interval. Throws when the requested tolerance cannot be certified,
/// reporting the error estimate that was achieved.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double tol,
                                    int max_depth = 48) {
  const double fa = f(a);
  const double fm = f(0.5 * (a + b));
  const double fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb))
    throw std::runtime_error("integrate_adaptive: integrand not finite");
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const QuadratureResult r =
      detail::simpson_recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
  if (r.error_estimate > tol)
    throw std::runtime_error(
        "integrate_adaptive: tolerance not met, achieved error estimate " +
        std::to_string(r.error_estimate));
  return r;
}

}  // namespace qg
