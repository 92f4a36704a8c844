#include "cuspflow/assembly.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cuspflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_size(const CuspedTriangulation& tri, const EdgeLengths& l) {
  if (static_cast<std::size_t>(l.size()) != tri.num_edges()) {
    throw std::invalid_argument("edge length vector has " + std::to_string(l.size()) + " entries, expected " +
                                std::to_string(tri.num_edges()));
  }
}

// 5-point Gauss-Legendre nodes and weights on [0, 1].
constexpr std::array<double, 5> kGaussNodes{
    0.04691007703066800, 0.23076534494715845, 0.5, 0.76923465505284155, 0.95308992296933200};
constexpr std::array<double, 5> kGaussWeights{
    0.11846344252809454, 0.23931433524968324, 0.28444444444444444, 0.23931433524968324,
    0.11846344252809454};

}  // namespace

TetMetric tet_metric(const CuspedTriangulation& tri, const EdgeLengths& l, std::size_t tet) {
  TetMetric m{};
  const Tet& t = tri.tets()[tet];
  for (std::size_t slot = 0; slot < kSlotCount; ++slot) m[slot] = l(t.edge_slots[slot]);
  return m;
}

Eigen::VectorXd extended_curvature(const CuspedTriangulation& tri, const EdgeLengths& l) {
  check_size(tri, l);
  Eigen::VectorXd k = Eigen::VectorXd::Constant(l.size(), kTwoPi);
  for (std::size_t j = 0; j < tri.num_tets(); ++j) {
    const DihedralAngles alpha = extended_angles(tet_metric(tri, l, j));
    for (std::size_t slot = 0; slot < kSlotCount; ++slot) k(tri.tets()[j].edge_slots[slot]) -= alpha[slot];
  }
  return k;
}

CurvatureState curvature(const CuspedTriangulation& tri, const EdgeLengths& l) {
  check_size(tri, l);
  CurvatureState state;
  state.curvature = Eigen::VectorXd::Constant(l.size(), kTwoPi);
  double covolume = 0.0;
  for (std::size_t j = 0; j < tri.num_tets(); ++j) {
    const TetMetric m = tet_metric(tri, l, j);
    const DihedralAngles alpha = extended_angles(m);
    if (!classify(m).nondegenerate()) state.degenerate_tets.push_back(j);
    double twice_volume = 0.0;
    for (std::size_t slot = 0; slot < kSlotCount; ++slot) {
      state.curvature(tri.tets()[j].edge_slots[slot]) -= alpha[slot];
      const double lob = lobachevsky(alpha[slot], kLobachevskyFullPrecision);
      twice_volume += lob;
      covolume += lob + alpha[slot] * m[slot];
    }
    state.total_volume += 0.5 * twice_volume;
  }
  state.energy = covolume - kTwoPi * l.sum();
  return state;
}

CurvatureState curvature_with_laplacian(const CuspedTriangulation& tri, const EdgeLengths& l) {
  CurvatureState state = curvature(tri, l);
  if (state.degenerate_tets.empty()) state.laplacian = laplacian(tri, l);
  return state;
}

Eigen::MatrixXd laplacian(const CuspedTriangulation& tri, const EdgeLengths& l) {
  check_size(tri, l);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(l.size(), l.size());
  for (std::size_t j = 0; j < tri.num_tets(); ++j) {
    TetJacobian jac;
    try {
      jac = tet_jacobian(tet_metric(tri, l, j));
    } catch (const DegenerateTetError&) {
      throw DegenerateTetError("laplacian undefined: tet " + std::to_string(j) + " is not nondegenerate", j);
    }
    const auto& slots = tri.tets()[j].edge_slots;
    for (std::size_t s = 0; s < kSlotCount; ++s)
      for (std::size_t t = 0; t < kSlotCount; ++t)
        lap(slots[s], slots[t]) -= jac(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t));
  }
  return lap;
}

Eigen::MatrixXd laplacian_via_incidence(const CuspedTriangulation& tri, const IncidenceMatrix& g,
                                        const EdgeLengths& l) {
  check_size(tri, l);
  const auto block_count = static_cast<Eigen::Index>(tri.num_tets());
  Eigen::MatrixXd j_all = Eigen::MatrixXd::Zero(6 * block_count, 6 * block_count);
  for (std::size_t j = 0; j < tri.num_tets(); ++j) {
    try {
      j_all.block<6, 6>(6 * static_cast<Eigen::Index>(j), 6 * static_cast<Eigen::Index>(j)) =
          tet_jacobian(tet_metric(tri, l, j));
    } catch (const DegenerateTetError&) {
      throw DegenerateTetError("laplacian undefined: tet " + std::to_string(j) + " is not nondegenerate", j);
    }
  }
  return -(g * j_all * g.transpose());
}

double energy(const CuspedTriangulation& tri, const EdgeLengths& l) {
  check_size(tri, l);
  double covolume = 0.0;
  for (std::size_t j = 0; j < tri.num_tets(); ++j) covolume += tet_covolume(tet_metric(tri, l, j));
  return covolume - kTwoPi * l.sum();
}

double energy_difference(const CuspedTriangulation& tri, const EdgeLengths& from, const EdgeLengths& to) {
  check_size(tri, from);
  check_size(tri, to);
  const Eigen::VectorXd delta = to - from;
  if (delta.isZero(0.0)) return 0.0;
  auto gauss = [&](double a, double b) {
    double sum = 0.0;
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
      const Eigen::VectorXd point = from + (a + (b - a) * kGaussNodes[q]) * delta;
      sum += kGaussWeights[q] * extended_curvature(tri, point).dot(delta);
    }
    return -(b - a) * sum;
  };
  const double coarse = gauss(0.0, 1.0);
  const double fine = gauss(0.0, 0.5) + gauss(0.5, 1.0);

  // Rounding level of a direct difference of the two energies.
  double magnitude = 0.0;
  for (const EdgeLengths* l : {&from, &to}) {
    for (std::size_t j = 0; j < tri.num_tets(); ++j) magnitude += std::abs(tet_covolume(tet_metric(tri, *l, j)));
    magnitude += kTwoPi * l->lpNorm<1>();
  }
  const double rounding = 16.0 * std::numeric_limits<double>::epsilon() * magnitude;
  // The quadrature is only trustworthy while the angles stay smooth on the
  // segment; across a flat tetrahedron they are merely Hoelder continuous.
  if (std::abs(fine - coarse) <= rounding) return fine;
  return energy(tri, to) - energy(tri, from);
}

GradientCheckReport energy_gradient_check(const CuspedTriangulation& tri, const EdgeLengths& l, double step) {
  GradientCheckReport report;
  report.analytic = -extended_curvature(tri, l);
  report.finite_difference.resize(l.size());
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    EdgeLengths plus = l;
    EdgeLengths minus = l;
    plus(i) += step;
    minus(i) -= step;
    report.finite_difference(i) = (energy(tri, plus) - energy(tri, minus)) / (2.0 * step);
  }
  const double scale = std::max(report.analytic.lpNorm<Eigen::Infinity>(), 1.0);
  report.max_relative_error = (report.finite_difference - report.analytic).lpNorm<Eigen::Infinity>() / scale;
  return report;
}

LaplacianSpectrum analyze_laplacian(const Eigen::MatrixXd& lap, const CuspMatrix& cusp, double kernel_tol) {
  LaplacianSpectrum out;
  out.asymmetry = (lap - lap.transpose()).lpNorm<Eigen::Infinity>();
  const Eigen::MatrixXd sym = 0.5 * (lap + lap.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& values = eig.eigenvalues();
  out.min_eigenvalue = values.minCoeff();
  out.max_eigenvalue = values.maxCoeff();
  out.kernel_dimension = static_cast<long>((values.array().abs() < kernel_tol).count());
  out.cusp_residual = (lap * cusp.transpose()).lpNorm<Eigen::Infinity>();
  const Eigen::MatrixXd basis = kernel_basis(cusp);
  if (basis.cols() > 0) {
    const Eigen::MatrixXd restricted = basis.transpose() * sym * basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> reig(restricted, Eigen::EigenvaluesOnly);
    out.max_eigenvalue_on_kernel_of_c = reig.eigenvalues().maxCoeff();
  }
  return out;
}

}  // namespace cuspflow
