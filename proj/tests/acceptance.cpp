// Acceptance checks for the solver. Prints one PASS/FAIL line per criterion
// and exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "cuspflow/assembly.hpp"
#include "cuspflow/flow.hpp"
#include "cuspflow/tetra.hpp"
#include "cuspflow/triangulation.hpp"
#include "oracles.hpp"

using namespace cuspflow;
using oracle::kPi;

namespace {

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

CuspedTriangulation load(const char* name) {
  auto tri = load_triangulation(oracle::data_file(name));
  require_valid(tri);
  return tri;
}

const char* kManifolds[] = {"figure8.tri", "sister.tri", "m009.tri", "whitehead.tri", "m203.tri"};

Eigen::VectorXd uniform(std::mt19937_64& rng, Eigen::Index n, double range) {
  std::uniform_real_distribution<double> u(-range, range);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

Eigen::VectorXd to_vec(const std::array<double, 6>& a) { return Eigen::Map<const Eigen::VectorXd>(a.data(), 6); }

TetMetric to_metric(const Eigen::VectorXd& v) {
  TetMetric m;
  for (int i = 0; i < 6; ++i) m[static_cast<std::size_t>(i)] = v(i);
  return m;
}

TetMetric random_nondegenerate(std::mt19937_64& rng) {
  while (true) {
    const TetMetric m = to_metric(uniform(rng, 6, 1.5));
    if (classify(m).nondegenerate()) return m;
  }
}

// Max deviation of every tet angle from pi/3.
double regular_angle_error(const CuspedTriangulation& tri, const EdgeLengths& l) {
  double err = 0;
  for (std::size_t j = 0; j < tri.num_tets(); ++j) {
    for (double a : extended_angles(tet_metric(tri, l, j))) err = std::max(err, std::fabs(a - kPi / 3));
  }
  return err;
}

void figure_eight_convergence() {
  const auto tri = load("figure8.tri");
  const double reference = 6.0 * oracle::lobachevsky_quadrature(kPi / 3);
  double worst_k = 0, worst_angle = 0, worst_volume = 0;
  std::size_t worst_steps = 0;
  bool all_converged = true;
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    FlowConfig cfg;
    cfg.max_steps = 10000;
    const auto r = run_flow(tri, random_lengths(2, seed, 1.0), cfg);
    all_converged = all_converged && r.converged;
    worst_k = std::max(worst_k, r.final_curvature_norm);
    worst_steps = std::max(worst_steps, r.steps_taken);
    worst_angle = std::max(worst_angle, regular_angle_error(tri, r.final_l));
    worst_volume = std::max(worst_volume, std::fabs(r.final_volume - reference));
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = all_converged && worst_k < 1e-10 && worst_steps <= 10000 && worst_angle < 1e-8 &&
                  worst_volume < 1e-8 && seconds < 5.0;
  report(1, "figure-eight convergence", ok,
         "20 seeds, max |K|=" + fmt("%.2e", worst_k) + ", max steps=" + std::to_string(worst_steps) +
             ", max angle err=" + fmt("%.2e", worst_angle) + ", max volume err=" + fmt("%.2e", worst_volume) +
             ", time=" + fmt("%.3f", seconds) + "s");
}

void jacobian_consistency() {
  std::mt19937_64 rng(2002);
  Eigen::Matrix<double, 6, 4> null;
  null << 1, 1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 1, 0, 0, 1, 1, 0, 1, 0, 1, 0, 1, 1, 0;
  double worst_fd = 0, worst_null = 0;
  for (int k = 0; k < 100; ++k) {
    const TetMetric m = random_nondegenerate(rng);
    const TetJacobian j = tet_jacobian(m);
    const Eigen::MatrixXd fd = oracle::jacobian_fd(
        [](const Eigen::VectorXd& x) { return to_vec(extended_angles(to_metric(x))); }, to_vec(m), 1e-5);
    worst_fd = std::max(worst_fd, oracle::relative_error(j, fd));
    worst_null = std::max(worst_null, (j * null).cwiseAbs().maxCoeff());
  }
  report(2, "Jacobian consistency", worst_fd < 1e-6 && worst_null < 1e-10,
         "100 metrics, max FD rel err=" + fmt("%.2e", worst_fd) + ", max |J v|=" + fmt("%.2e", worst_null));
}

void laplacian_structure() {
  const auto tri = load("figure8.tri");
  const auto c = build_cusp_matrix(tri);
  std::mt19937_64 rng(3003);
  double asym = 0, max_eig = -1e300, cusp = 0, restricted = -1e300;
  int points = 0;
  while (points < 20) {
    const auto l = uniform(rng, 2, 1.0);
    if (curvature(tri, l).degenerate_count() > 0) continue;
    ++points;
    const auto spec = analyze_laplacian(laplacian(tri, l), c);
    asym = std::max(asym, spec.asymmetry);
    max_eig = std::max(max_eig, spec.max_eigenvalue);
    cusp = std::max(cusp, spec.cusp_residual);
    restricted = std::max(restricted, spec.max_eigenvalue_on_kernel_of_c);
  }
  const bool ok = asym < 1e-12 && max_eig <= 1e-10 && cusp < 1e-8 && restricted < 0;
  report(3, "Laplacian structure", ok,
         "20 points, asymmetry=" + fmt("%.2e", asym) + ", max eig=" + fmt("%.2e", max_eig) +
             ", |Lambda C^T|=" + fmt("%.2e", cusp) + ", max eig on Ker(C)=" + fmt("%.3e", restricted));
}

void energy_gradient() {
  std::mt19937_64 rng(4004);
  double worst = 0;
  int degenerate = 0, points = 0;
  for (const char* name : {"figure8.tri", "whitehead.tri"}) {
    const auto tri = load(name);
    for (int k = 0; k < 50; ++k, ++points) {
      const auto l = uniform(rng, static_cast<Eigen::Index>(tri.num_edges()), 3.0);
      if (curvature(tri, l).degenerate_count() > 0) ++degenerate;
      worst = std::max(worst, energy_gradient_check(tri, l, 1e-5).max_relative_error);
    }
  }
  report(4, "energy gradient", worst < 1e-5 && degenerate > 0,
         std::to_string(points) + " points (" + std::to_string(degenerate) + " degenerate), max rel err=" +
             fmt("%.2e", worst));
}

void gauge_invariance() {
  std::mt19937_64 rng(5005);
  double drift = 0, curvature_shift = 0;
  int flows = 0;
  for (const char* name : kManifolds) {
    const auto tri = load(name);
    const auto c = build_cusp_matrix(tri);
    for (Scheme s : {Scheme::Euler, Scheme::RK4, Scheme::NewtonHybrid, Scheme::Calabi}) {
      for (bool gauge_fix : {true, false}) {
        FlowConfig cfg;
        cfg.scheme = s;
        cfg.step = s == Scheme::Calabi ? 0.05 : 0.1;
        cfg.gauge_fix = gauge_fix;
        cfg.record_lengths = true;
        const auto r = run_flow(tri, uniform(rng, static_cast<Eigen::Index>(tri.num_edges()), 1.0), cfg);
        ++flows;
        if (r.status == FlowStatus::Aborted) drift = 1e300;
        const Eigen::VectorXd c0 = c * r.trace.front().lengths.value();
        for (const auto& row : r.trace) drift = std::max(drift, (c * row.lengths.value() - c0).cwiseAbs().maxCoeff());
        drift = std::max(drift, r.max_gauge_drift);
      }
    }
    const auto l = uniform(rng, static_cast<Eigen::Index>(tri.num_edges()), 2.0);
    const auto k0 = extended_curvature(tri, l);
    for (int i = 0; i < 10; ++i) {
      const auto x = uniform(rng, static_cast<Eigen::Index>(tri.num_cusps()), 2.0);
      curvature_shift =
          std::max(curvature_shift, (extended_curvature(tri, l + c.transpose() * x) - k0).cwiseAbs().maxCoeff());
    }
  }
  report(5, "gauge invariance", drift < 1e-8 && curvature_shift < 1e-9,
         std::to_string(flows) + " flows, max |C l(t) - C l(0)|=" + fmt("%.2e", drift) +
             ", max |K(l + C^T x) - K(l)|=" + fmt("%.2e", curvature_shift));
}

void energy_monotonicity() {
  std::mt19937_64 rng(6006);
  bool euler_ok = true, newton_ok = true;
  std::size_t euler_rows = 0, newton_rows = 0;
  double worst_excess = -1e300, worst_newton = -1e300;
  for (const char* name : kManifolds) {
    const auto tri = load(name);
    for (int k = 0; k < 4; ++k) {
      const auto l0 = uniform(rng, static_cast<Eigen::Index>(tri.num_edges()), 2.0);
      FlowConfig euler;
      euler.scheme = Scheme::Euler;
      const auto re = run_flow(tri, l0, euler);
      euler_ok = euler_ok && re.status != FlowStatus::Aborted;
      for (std::size_t i = 1; i < re.trace.size(); ++i, ++euler_rows) {
        const double excess = re.trace[i].energy_delta - re.trace[i].descent_slack;
        worst_excess = std::max(worst_excess, excess);
        euler_ok = euler_ok && excess <= 0;
      }
      const auto rn = run_flow(tri, l0, FlowConfig{});
      newton_ok = newton_ok && rn.status != FlowStatus::Aborted;
      for (std::size_t i = 1; i < rn.trace.size(); ++i, ++newton_rows) {
        worst_newton = std::max(worst_newton, rn.trace[i].energy_delta);
        newton_ok = newton_ok && rn.trace[i].energy_delta < 0;
      }
    }
  }
  report(6, "energy monotonicity", euler_ok && newton_ok,
         "euler " + std::to_string(euler_rows) + " steps, max dF - 10h^2|K|^2=" + fmt("%.2e", worst_excess) +
             "; newton-hybrid " + std::to_string(newton_rows) + " steps, max dF=" + fmt("%.2e", worst_newton));
}

void extension_continuity() {
  std::mt19937_64 rng(7007);
  double worst_jump = 0;
  bool exact = true;
  int segments = 0;
  while (segments < 10) {
    const Eigen::VectorXd p = uniform(rng, 6, 2.0), q = uniform(rng, 6, 2.0);
    auto at = [&](double u) { return to_metric(p + u * (q - p)); };
    const bool start_nd = classify(at(0)).nondegenerate();
    if (start_nd == classify(at(1)).nondegenerate()) continue;
    ++segments;
    double lo = 0, hi = 1;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (classify(at(mid)).nondegenerate() == start_nd ? lo : hi) = mid;
    }
    const double u = 0.5 * (lo + hi);
    const TetMetric before = at(u - 1e-6), after = at(u + 1e-6);
    const auto a = extended_angles(before), b = extended_angles(after);
    for (int i = 0; i < 6; ++i) worst_jump = std::max(worst_jump, std::fabs(a[i] - b[i]));
    const TetMetric flat = classify(before).nondegenerate() ? after : before;
    const RegionClass region = classify(flat);
    const auto alpha = extended_angles(flat);
    const auto pair = static_cast<std::size_t>(region.pair);
    for (std::size_t i = 0; i < 6; ++i) exact = exact && alpha[i] == ((i % 3 == pair) ? kPi : 0.0);
  }
  report(7, "extension continuity", worst_jump < 1e-4 && exact,
         "10 segments, max angle jump at +-1e-6=" + fmt("%.2e", worst_jump) +
             ", degenerate side exactly pi/0: " + (exact ? "yes" : "no"));
}

void rigidity() {
  std::mt19937_64 rng(8008);
  double decoration = 0, schemes = 0;
  bool converged = true;
  for (const char* name : kManifolds) {
    const auto tri = load(name);
    const auto c = build_cusp_matrix(tri);
    const auto n = static_cast<Eigen::Index>(tri.num_edges());
    for (int k = 0; k < 2; ++k) {
      const auto l0 = uniform(rng, n, 1.0);
      const auto x = uniform(rng, static_cast<Eigen::Index>(tri.num_cusps()), 1.0);
      FlowConfig raw;
      raw.gauge_fix = false;
      const auto a = run_flow(tri, l0, raw);
      const auto b = run_flow(tri, l0 + c.transpose() * x, raw);
      FlowConfig euler, rk4;
      euler.scheme = Scheme::Euler;
      euler.step = 0.05;
      rk4.scheme = Scheme::RK4;
      const auto e = run_flow(tri, l0, euler);
      const auto r = run_flow(tri, l0, rk4);
      converged = converged && a.converged && b.converged && e.converged && r.converged;
      decoration = std::max(decoration, gauge_residual(a.final_l - b.final_l, c));
      schemes = std::max(schemes, gauge_residual(e.final_l - r.final_l, c));
    }
  }
  report(8, "rigidity and uniqueness", converged && decoration < 1e-6 && schemes < 1e-6,
         "decoration-shifted limits residual=" + fmt("%.2e", decoration) +
             ", euler vs rk4 residual=" + fmt("%.2e", schemes));
}

void degenerate_start() {
  // Both tets of this triangulation always share one shape, so a start with a
  // flat tetrahedron has both of them flat.
  const auto tri = load("figure8.tri");
  const double reference = 6.0 * oracle::lobachevsky_quadrature(kPi / 3);
  bool ok = true;
  std::string detail;
  for (double d : {5.0, 25.0}) {
    const Eigen::Vector2d l0(d, -d);
    const auto initial = curvature(tri, l0);
    FlowConfig cfg;
    cfg.max_steps = 10000;
    const auto r = run_flow(tri, l0, cfg);
    const double angle = regular_angle_error(tri, r.final_l);
    ok = ok && initial.degenerate_count() > 0 && r.converged && r.final_curvature_norm < 1e-10 && angle < 1e-8 &&
         std::fabs(r.final_volume - reference) < 1e-8;
    detail += "l0=(" + fmt("%g", d) + "," + fmt("%g", -d) + "): " + std::to_string(initial.degenerate_count()) +
              " flat tets, " + std::to_string(r.steps_taken) + " steps, angle err=" + fmt("%.2e", angle) +
              ", volume err=" + fmt("%.2e", std::fabs(r.final_volume - reference)) + "; ";
  }
  report(9, "degenerate start", ok, detail);
}

void schlafli() {
  std::mt19937_64 rng(10010);
  double worst = 0;
  int paths = 0, samples = 0;
  while (paths < 10) {
    const TetMetric base = random_nondegenerate(rng);
    const Eigen::VectorXd dir = uniform(rng, 6, 1.0);
    ++paths;
    for (double s : {-0.2, -0.1, 0.0, 0.1, 0.2}) {
      const Eigen::VectorXd m = to_vec(base) + s * dir;
      const double h = 1e-5;
      const TetMetric mp = to_metric(m + h * dir), mm = to_metric(m - h * dir);
      if (!classify(mp).nondegenerate() || !classify(mm).nondegenerate()) continue;
      ++samples;
      const double lhs = -2.0 * (tet_volume(mp) - tet_volume(mm)) / (2 * h);
      const auto ap = extended_angles(mp), am = extended_angles(mm);
      double rhs = 0;
      for (int i = 0; i < 6; ++i) rhs += m(i) * (ap[i] - am[i]) / (2 * h);
      worst = std::max(worst, std::fabs(lhs - rhs) / std::max(std::fabs(lhs), 1e-12));
    }
  }
  report(10, "Schlafli identity", worst < 1e-5,
         std::to_string(paths) + " paths, " + std::to_string(samples) + " samples, max rel err=" + fmt("%.2e", worst));
}

}  // namespace

int main() {
  figure_eight_convergence();
  jacobian_consistency();
  laplacian_structure();
  energy_gradient();
  gauge_invariance();
  energy_monotonicity();
  extension_continuity();
  rigidity();
  degenerate_start();
  schlafli();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
