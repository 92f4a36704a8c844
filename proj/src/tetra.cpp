#include "cuspflow/tetra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cuspflow {

namespace {

constexpr double kPi = std::numbers::pi;

std::array<double, 3> pair_exponents(const TetMetric& m) {
  return {(m[0] + m[3]) / 2.0, (m[1] + m[4]) / 2.0, (m[2] + m[5]) / 2.0};
}

// Pair sums up to a common positive factor. Unscaled (bit-identical to
// pair_sums) whenever every exponent is within range; otherwise rescaled by
// the largest so that angles and classification stay total on R^6.
std::array<double, 3> cusp_triangle_sides(const TetMetric& m) {
  auto x = pair_exponents(m);
  const double hi = std::max({x[0], x[1], x[2]});
  const double lo = std::min({x[0], x[1], x[2]});
  const double shift = (hi > kMaxPairExponent || lo < -kMaxPairExponent) ? hi : 0.0;
  return {std::exp(x[0] - shift), std::exp(x[1] - shift), std::exp(x[2] - shift)};
}

RegionClass classify_sides(const std::array<double, 3>& s) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (s[i] > s[k]) k = i;
  const double rest = s[(k + 1) % 3] + s[(k + 2) % 3];
  const auto pair = static_cast<EdgePair>(k);
  if (s[k] < rest) return RegionClass::non_degenerate();
  if (s[k] == rest) return RegionClass::boundary(pair);
  return RegionClass::degenerate(pair);
}

// Angle opposite side `a` in the triangle with sides a, b, c.
double opposite_angle(double a, double b, double c) {
  const double cosine = (b * b + c * c - a * a) / (2.0 * b * c);
  return std::acos(std::clamp(cosine, -1.0, 1.0));
}

}  // namespace

std::string to_string(EdgePair p) {
  switch (p) {
    case EdgePair::P12_34: return "12-34";
    case EdgePair::P13_24: return "13-24";
    case EdgePair::P14_23: return "14-23";
  }
  return "?";
}

std::string to_string(const RegionClass& r) {
  switch (r.kind) {
    case RegionClass::Kind::NonDegenerate: return "nondegenerate";
    case RegionClass::Kind::Boundary: return "boundary(" + to_string(r.pair) + ")";
    case RegionClass::Kind::Degenerate: return "degenerate(" + to_string(r.pair) + ")";
  }
  return "?";
}

OppositePairSums pair_sums(const TetMetric& m) {
  const auto x = pair_exponents(m);
  for (double v : x) {
    if (!(std::abs(v) <= kMaxPairExponent)) {
      throw OutOfRangeMetric("pair sum exponent " + std::to_string(v) + " outside [-300, 300]");
    }
  }
  return {std::exp(x[0]), std::exp(x[1]), std::exp(x[2])};
}

RegionClass classify(const TetMetric& m) { return classify_sides(cusp_triangle_sides(m)); }

DihedralAngles extended_angles(const TetMetric& m) {
  const auto s = cusp_triangle_sides(m);
  const RegionClass region = classify_sides(s);
  std::array<double, 3> alpha{};
  if (region.nondegenerate()) {
    alpha[0] = opposite_angle(s[0], s[1], s[2]);
    alpha[1] = opposite_angle(s[1], s[2], s[0]);
    alpha[2] = opposite_angle(s[2], s[0], s[1]);
  } else {
    alpha[static_cast<std::size_t>(region.pair)] = kPi;
  }
  return {alpha[0], alpha[1], alpha[2], alpha[0], alpha[1], alpha[2]};
}

TetJacobian tet_jacobian(const TetMetric& m) {
  const RegionClass region = classify(m);
  if (!region.nondegenerate()) {
    throw DegenerateTetError("tet_jacobian: metric is " + to_string(region) +
                             "; the Jacobian is only defined on nondegenerate tetrahedra");
  }
  const DihedralAngles alpha = extended_angles(m);
  const double cot12 = 1.0 / std::tan(alpha[0]);
  const double cot13 = 1.0 / std::tan(alpha[1]);
  const double cot14 = 1.0 / std::tan(alpha[2]);

  Eigen::Matrix3d cot_matrix;
  cot_matrix << cot13 + cot14, -cot14, -cot13,
                -cot14, cot12 + cot14, -cot12,
                -cot13, -cot12, cot12 + cot13;

  TetJacobian jac;
  jac << cot_matrix, cot_matrix, cot_matrix, cot_matrix;
  return 0.5 * jac;
}

double tet_volume(const TetMetric& m) {
  const DihedralAngles alpha = extended_angles(m);
  double sum = 0.0;
  for (double a : alpha) sum += lobachevsky(a, kLobachevskyFullPrecision);
  return 0.5 * sum;
}

double tet_covolume(const TetMetric& m) {
  const DihedralAngles alpha = extended_angles(m);
  double twice_volume = 0.0;
  double work = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    twice_volume += lobachevsky(alpha[i], kLobachevskyFullPrecision);
    work += alpha[i] * m[i];
  }
  return twice_volume + work;
}

}  // namespace cuspflow
