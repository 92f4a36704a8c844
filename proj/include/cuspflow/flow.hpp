#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cuspflow/assembly.hpp"
#include "cuspflow/triangulation.hpp"

namespace cuspflow {

enum class Scheme { Euler, RK4, NewtonHybrid, Calabi };

std::string to_string(Scheme s);
/// Accepts "euler", "rk4", "newton-hybrid", "calabi".
Scheme parse_scheme(const std::string& name);

struct FlowConfig {
  Scheme scheme = Scheme::NewtonHybrid;
  double step = 0.1;
  double tol = 1e-10;
  std::size_t max_steps = 1'000'000;
  std::size_t trace_every = 1;
  bool gauge_fix = true;
  // Euler/RK4 only: halve the step until it decreases the energy by at least
  // 1e-4 h |K|^2 (which implies the 10 h^2 |K|^2 descent slack); the reduced
  // step is kept for the rest of the run.
  bool adaptive = false;
  // Newton-hybrid switches to Newton steps once |K|_inf drops below this.
  double newton_switch = 0.1;
  bool record_lengths = false;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

enum class StepKind { Initial, Explicit, Newton, Calabi };

std::string to_string(StepKind k);

struct TraceRow {
  std::size_t step = 0;
  double t = 0.0;
  double knorm_inf = 0.0;
  double knorm_2 = 0.0;
  double energy = 0.0;
  double volume = 0.0;
  std::size_t degenerate_tets = 0;
  // Energy change since the previous row as a line integral of -K (see
  // energy_difference); zero on the first row.
  double energy_delta = 0.0;
  // Sum over the steps since the previous row of the descent slack 10 h^2 |K|_2^2.
  double descent_slack = 0.0;
  StepKind kind = StepKind::Initial;
  std::optional<Eigen::VectorXd> lengths;
};

using FlowTrace = std::vector<TraceRow>;

enum class FlowStatus { Converged, MaxSteps, Aborted };

std::string to_string(FlowStatus s);

struct FlowResult {
  EdgeLengths initial_l;  // after gauge projection, when enabled
  EdgeLengths final_l;
  FlowStatus status = FlowStatus::MaxSteps;
  bool converged = false;
  std::string message;
  std::size_t steps_taken = 0;
  double tol = 0.0;
  double final_curvature_norm = 0.0;
  double final_volume = 0.0;
  double final_energy = 0.0;
  // Nonzero on a converged run means the zero-curvature limit is a degenerate
  // generalized metric, not a complete hyperbolic structure on this triangulation.
  std::size_t final_degenerate_tets = 0;
  double max_gauge_drift = 0.0;  // max_t |C l(t) - C l(0)|_inf over every step
  std::size_t newton_steps = 0;
  FlowTrace trace;
};

/// One explicit step of dl/dt = K~(l). Only Euler and RK4 are accepted.
EdgeLengths ricci_step(const CuspedTriangulation& tri, const EdgeLengths& l, double h,
                       Scheme scheme = Scheme::Euler);

/// One Euler step of the Calabi flow dl/dt = -Lambda K. Throws
/// DegenerateTetError if some tetrahedron is degenerate at l.
EdgeLengths calabi_step(const CuspedTriangulation& tri, const EdgeLengths& l, double h);

/// Integrates the extended flow from l0 until |K~|_inf < cfg.tol or
/// cfg.max_steps. A non-finite state aborts the run with status Aborted.
/// The triangulation must be valid.
///
/// newton-hybrid: damped Newton steps on Ker(C) once every tet is nondegenerate
/// and |K~|_inf < newton_switch, otherwise energy-decreasing Euler steps.
/// calabi: Calabi steps with step halving until the energy decreases (the
/// reduced step is kept), and energy-decreasing Euler steps while some tet is flat.
FlowResult run_flow(const CuspedTriangulation& tri, const EdgeLengths& l0, const FlowConfig& cfg);

/// Independent runs on worker threads; results are returned in input order
/// and are identical to sequential run_flow calls.
std::vector<FlowResult> run_flows(const CuspedTriangulation& tri, const std::vector<EdgeLengths>& starts,
                                  const FlowConfig& cfg, unsigned threads = 0);

/// Converged below tolerance with a curvature norm that is non-increasing over
/// the last `window` trace rows.
bool detect_equilibrium(const FlowResult& result, std::size_t window = 4);

/// Uniform in [-range, range]^n from a 64-bit Mersenne twister seeded with seed.
EdgeLengths random_lengths(std::size_t n, std::uint64_t seed, double range);

}  // namespace cuspflow
