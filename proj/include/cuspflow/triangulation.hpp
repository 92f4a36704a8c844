#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cuspflow {

using EdgeLengths = Eigen::VectorXd;
using IncidenceMatrix = Eigen::MatrixXd;
using CuspMatrix = Eigen::MatrixXd;

// Edge slots of a tetrahedron with ideal vertices 1..4, in the order
// 12, 13, 14, 34, 24, 23. Slot i and slot i + 3 are opposite edges.
inline constexpr std::size_t kSlotCount = 6;
inline constexpr std::array<std::array<int, 2>, kSlotCount> kSlotVertices{{
    {0, 1}, {0, 2}, {0, 3}, {2, 3}, {1, 3}, {1, 2}}};

constexpr std::size_t opposite_slot(std::size_t slot) { return (slot + 3) % kSlotCount; }

struct Tet {
  std::optional<long> id;
  std::array<int, 6> edge_slots{};
  std::array<int, 4> cusp_slots{};
};

class TriangulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Combinatorial gluing data of an ideally triangulated cusped 3-manifold.
///
/// Indices are resolved and range-checked at construction; the global
/// invariants (edge/tet count, cusp coverage, consistent edge ends, rank of
/// the cusp matrix) are checked by validate().
class CuspedTriangulation {
 public:
  CuspedTriangulation(std::size_t num_edges, std::size_t num_cusps, std::vector<Tet> tets,
                      std::string name = {});

  std::size_t num_tets() const { return tets_.size(); }
  std::size_t num_edges() const { return num_edges_; }
  std::size_t num_cusps() const { return num_cusps_; }
  const std::vector<Tet>& tets() const { return tets_; }
  const std::string& name() const { return name_; }

  /// Number of tet edge slots identified with each edge.
  std::vector<int> edge_degrees() const;

 private:
  std::size_t num_edges_;
  std::size_t num_cusps_;
  std::vector<Tet> tets_;
  std::string name_;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> problems;
  std::vector<int> edge_degrees;
  std::optional<long> cusp_rank;
};

/// Parse the JSON triangulation document. Throws TriangulationError on
/// malformed input, out-of-range indices, duplicate tet ids or an empty tet
/// list. Slot order is kept exactly as written.
CuspedTriangulation parse_triangulation(std::string_view text);
CuspedTriangulation load_triangulation(const std::string& path);

ValidationReport validate(const CuspedTriangulation& tri);

/// Throws TriangulationError carrying the first problem if validate() fails.
void require_valid(const CuspedTriangulation& tri);

/// N x 6N matrix, G(i, 6j + n) = 1 iff slot n of tet j is edge i.
IncidenceMatrix build_incidence(const CuspedTriangulation& tri);

/// s x N matrix counting the ends of each edge class at each cusp.
/// Throws TriangulationError if two occurrences of an edge disagree on
/// their (unordered) pair of end cusps.
CuspMatrix build_cusp_matrix(const CuspedTriangulation& tri);

/// Numerical rank of C (singular values relative to the largest).
long matrix_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

/// Orthonormal basis of Ker(C) as the columns of an N x (N - rank) matrix.
Eigen::MatrixXd kernel_basis(const CuspMatrix& cusp);

/// Remove the Im(C^T) component: returns l - C^T x with (C C^T) x = C l.
EdgeLengths gauge_project(const EdgeLengths& l, const CuspMatrix& cusp);

/// Least-squares distance of v from Im(C^T), i.e. |v - C^T x| minimised over x.
double gauge_residual(const EdgeLengths& v, const CuspMatrix& cusp);

}  // namespace cuspflow
