#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cuspflow/tetra.hpp"

// Lobachevsky function via the power series
//
//   L(t) = t - t log(2t) + sum_{n>=1} zeta(2n) / (n (2n+1)) * t^(2n+1) / pi^(2n),
//
// valid for |t| < pi, applied after reducing the argument to [-pi/2, pi/2]
// with pi-periodicity and oddness. On the reduced range consecutive terms
// shrink by at least (t/pi)^2 <= 1/4, so the tail after term n is bounded by
// term_n * q / (1 - q).

namespace cuspflow {

namespace {

constexpr std::size_t kMaxTerms = 128;

const std::array<double, kMaxTerms + 1>& series_coefficients() {
  static const std::array<double, kMaxTerms + 1> coeffs = [] {
    std::array<double, kMaxTerms + 1> c{};
    for (std::size_t n = 1; n <= kMaxTerms; ++n) {
      const double two_n = 2.0 * static_cast<double>(n);
      const double zeta = n == 1 ? std::numbers::pi * std::numbers::pi / 6.0 : std::riemann_zeta(two_n);
      c[n] = zeta / (static_cast<double>(n) * (two_n + 1.0));
    }
    return c;
  }();
  return coeffs;
}

double reduced_lobachevsky(double t, double tol) {
  // t in (0, pi/2]
  const auto& c = series_coefficients();
  const double q = (t / std::numbers::pi) * (t / std::numbers::pi);
  double sum = t - t * std::log(2.0 * t);
  double power = t;
  for (std::size_t n = 1; n <= kMaxTerms; ++n) {
    power *= q;
    const double term = c[n] * power;
    sum += term;
    if (term * q / (1.0 - q) < tol) break;
  }
  return sum;
}

}  // namespace

double lobachevsky(double x, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("lobachevsky: tol must be positive");
  if (!std::isfinite(x)) throw std::invalid_argument("lobachevsky: argument must be finite");
  constexpr double pi = std::numbers::pi;
  double r = x - pi * std::round(x / pi);
  if (r == 0.0) return 0.0;
  if (std::abs(r) >= pi / 2.0) return 0.0;  // L(pi/2) = 0 by oddness and periodicity
  const double value = reduced_lobachevsky(std::abs(r), tol);
  return r < 0.0 ? -value : value;
}

}  // namespace cuspflow
