#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cuspflow/tetra.hpp"
#include "cuspflow/triangulation.hpp"

namespace cuspflow {

/// Extended curvature and derived scalars of a generalized metric l in R^N.
struct CurvatureState {
  Eigen::VectorXd curvature;                // K~ per edge
  std::optional<Eigen::MatrixXd> laplacian;  // dK/dl, only at nondegenerate metrics
  double total_volume = 0.0;
  double energy = 0.0;
  std::vector<std::size_t> degenerate_tets;  // degenerate or boundary tetrahedra

  std::size_t degenerate_count() const { return degenerate_tets.size(); }
};

/// The six lengths tet j sees, in its own slot order.
TetMetric tet_metric(const CuspedTriangulation& tri, const EdgeLengths& l, std::size_t tet);

/// 2 pi minus the sum of extended dihedral angles around each edge.
Eigen::VectorXd extended_curvature(const CuspedTriangulation& tri, const EdgeLengths& l);

/// Curvature, total volume, Ricci energy and degenerate-tet list. Never throws
/// for finite input; the Laplacian is left empty.
CurvatureState curvature(const CuspedTriangulation& tri, const EdgeLengths& l);

/// Same as curvature() but also fills the Laplacian when every tet is nondegenerate.
CurvatureState curvature_with_laplacian(const CuspedTriangulation& tri, const EdgeLengths& l);

/// Lambda = -G J G^T, assembled slot by slot without materializing G.
/// Throws DegenerateTetError carrying the first offending tet index.
Eigen::MatrixXd laplacian(const CuspedTriangulation& tri, const EdgeLengths& l);

/// Same matrix through the explicit incidence product -G diag(J_1..J_N) G^T.
Eigen::MatrixXd laplacian_via_incidence(const CuspedTriangulation& tri, const IncidenceMatrix& g,
                                        const EdgeLengths& l);

/// Ricci energy: sum of tet co-volumes minus 2 pi sum(l). Its gradient is -K~.
double energy(const CuspedTriangulation& tri, const EdgeLengths& l);

/// energy(to) - energy(from). Uses the line integral of -K~ along the segment
/// (composite Gauss-Legendre) when its error estimate is below the rounding
/// level of subtracting two energies, which keeps tiny steps accurate; falls
/// back to the plain difference when the segment crosses non-smooth points.
double energy_difference(const CuspedTriangulation& tri, const EdgeLengths& from, const EdgeLengths& to);

struct GradientCheckReport {
  Eigen::VectorXd finite_difference;
  Eigen::VectorXd analytic;  // -K~
  double max_relative_error = 0.0;
};

/// Compares central differences of energy() against -K~. The error is
/// |fd - analytic|_inf / max(|analytic|_inf, 1).
GradientCheckReport energy_gradient_check(const CuspedTriangulation& tri, const EdgeLengths& l,
                                          double step = 1e-5);

struct LaplacianSpectrum {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  long kernel_dimension = 0;
  double max_eigenvalue_on_kernel_of_c = 0.0;  // of P^T Lambda P, P spanning Ker(C)
  double cusp_residual = 0.0;                  // |Lambda C^T|_inf
  double asymmetry = 0.0;                      // |Lambda - Lambda^T|_inf
};

LaplacianSpectrum analyze_laplacian(const Eigen::MatrixXd& lap, const CuspMatrix& cusp,
                                    double kernel_tol = 1e-9);

}  // namespace cuspflow
