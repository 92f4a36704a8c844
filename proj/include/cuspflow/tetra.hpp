#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cuspflow {

/// Six edge lengths of one decorated ideal tetrahedron in slot order
/// 12, 13, 14, 34, 24, 23. Lengths are signed; any finite value is allowed.
using TetMetric = std::array<double, 6>;

/// Six dihedral angles in the same slot order as TetMetric.
using DihedralAngles = std::array<double, 6>;

using TetJacobian = Eigen::Matrix<double, 6, 6>;

/// Opposite edge pairs, named after their first slot.
enum class EdgePair { P12_34 = 0, P13_24 = 1, P14_23 = 2 };

std::string to_string(EdgePair p);

/// Exponentiated half sums of opposite edge lengths:
/// a = exp((l12 + l34) / 2), b = exp((l13 + l24) / 2), c = exp((l14 + l23) / 2).
/// They are the side lengths of the Euclidean cusp triangle (up to scale).
struct OppositePairSums {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;

  double operator[](std::size_t i) const { return i == 0 ? a : (i == 1 ? b : c); }
};

inline constexpr double kMaxPairExponent = 300.0;

class OutOfRangeMetric : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class DegenerateTetError : public std::domain_error {
 public:
  DegenerateTetError(const std::string& what, std::size_t tet_index = 0)
      : std::domain_error(what), tet_index_(tet_index) {}
  std::size_t tet_index() const { return tet_index_; }

 private:
  std::size_t tet_index_;
};

/// Throws OutOfRangeMetric if some |(l_ij + l_kh) / 2| exceeds kMaxPairExponent.
OppositePairSums pair_sums(const TetMetric& m);

struct RegionClass {
  enum class Kind { NonDegenerate, Boundary, Degenerate };
  Kind kind = Kind::NonDegenerate;
  EdgePair pair = EdgePair::P12_34;  // meaningful unless NonDegenerate

  bool nondegenerate() const { return kind == Kind::NonDegenerate; }
  bool operator==(const RegionClass&) const = default;

  static RegionClass non_degenerate() { return {}; }
  static RegionClass boundary(EdgePair p) { return {Kind::Boundary, p}; }
  static RegionClass degenerate(EdgePair p) { return {Kind::Degenerate, p}; }
};

std::string to_string(const RegionClass& r);

/// Exact comparison of the pair sums: the tetrahedron is nondegenerate iff the
/// largest pair sum is strictly less than the sum of the other two.
RegionClass classify(const TetMetric& m);

/// Dihedral angles, extended by constants (pi on the long pair, 0 elsewhere)
/// outside the admissible region. Total on R^6.
DihedralAngles extended_angles(const TetMetric& m);

/// d(alpha)/d(l) = 1/2 [[M, M], [M, M]] built from the cotangents of the
/// three distinct dihedral angles. Throws DegenerateTetError unless classify()
/// reports NonDegenerate.
TetJacobian tet_jacobian(const TetMetric& m);

/// Lobachevsky function -int_0^x log|2 sin t| dt to absolute accuracy tol.
double lobachevsky(double x, double tol = 1e-12);

// Volumes and co-volumes feed energy differences, so they evaluate the
// Lobachevsky function to rounding level.
inline constexpr double kLobachevskyFullPrecision = 1e-17;

/// 1/2 * sum of Lobachevsky(angle) over the six extended angles.
double tet_volume(const TetMetric& m);

/// 2 * volume + sum of angle * length, with extended angles everywhere.
/// C^1 and convex on R^6 with gradient equal to the extended angles.
double tet_covolume(const TetMetric& m);

}  // namespace cuspflow
