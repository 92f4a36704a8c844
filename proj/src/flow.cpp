#include "cuspflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace cuspflow {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;

struct FlowState {
  EdgeLengths l;
  CurvatureState curv;
};

FlowState evaluate(const CuspedTriangulation& tri, EdgeLengths l) {
  CurvatureState curv = curvature(tri, l);
  return {std::move(l), std::move(curv)};
}

bool finite_state(const FlowState& s) {
  return s.l.allFinite() && s.curv.curvature.allFinite() && std::isfinite(s.curv.energy) &&
         std::isfinite(s.curv.total_volume);
}

// Acceptance test for a trial step: energy must drop, by at least kArmijo times
// the first-order prediction h * slope (slope = dF/dh < 0 at h = 0).
bool sufficient_decrease(double drop, double h, double slope) { return drop < 0.0 && drop <= kArmijo * h * slope; }

// Damped Newton step for the energy on Ker(C). Returns nothing when the
// line search cannot find sufficient decrease.
std::optional<EdgeLengths> newton_step(const CuspedTriangulation& tri, const FlowState& s,
                                       const Eigen::MatrixXd& kernel) {
  const Eigen::MatrixXd lap = laplacian(tri, s.l);
  const Eigen::MatrixXd neg_restricted = -(kernel.transpose() * lap * kernel);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_restricted);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  const Eigen::VectorXd y = ldlt.solve(kernel.transpose() * s.curv.curvature);
  const Eigen::VectorXd delta = kernel * y;
  // Directional derivative of the energy along delta; negative for a descent direction.
  const double slope = -s.curv.curvature.dot(delta);
  if (!(slope < 0.0)) return std::nullopt;

  double t = 1.0;
  for (int i = 0; i < kMaxHalvings; ++i, t *= 0.5) {
    EdgeLengths candidate = s.l + t * delta;
    const double drop = energy_difference(tri, s.l, candidate);
    if (sufficient_decrease(drop, t, slope)) return candidate;
  }
  return std::nullopt;
}

// Explicit step of the given scheme, halving h until the energy drops
// sufficiently. Returns the new point and the step actually used.
std::optional<std::pair<EdgeLengths, double>> descent_step(const CuspedTriangulation& tri, const FlowState& s,
                                                           double h, Scheme scheme) {
  const double slope = -s.curv.curvature.squaredNorm();
  for (int i = 0; i < kMaxHalvings; ++i, h *= 0.5) {
    EdgeLengths candidate = ricci_step(tri, s.l, h, scheme);
    if (sufficient_decrease(energy_difference(tri, s.l, candidate), h, slope)) {
      return std::pair{std::move(candidate), h};
    }
  }
  return std::nullopt;
}

// Calabi step l - h Lambda K with the same safeguard; the Calabi flow also
// decreases the energy, at rate K^T Lambda K.
std::optional<std::pair<EdgeLengths, double>> calabi_descent_step(const CuspedTriangulation& tri,
                                                                  const FlowState& s, double h) {
  const Eigen::VectorXd direction = -(laplacian(tri, s.l) * s.curv.curvature);
  const double slope = -s.curv.curvature.dot(direction);
  if (!(slope < 0.0)) return std::nullopt;
  for (int i = 0; i < kMaxHalvings; ++i, h *= 0.5) {
    EdgeLengths candidate = s.l + h * direction;
    if (sufficient_decrease(energy_difference(tri, s.l, candidate), h, slope)) {
      return std::pair{std::move(candidate), h};
    }
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Euler: return "euler";
    case Scheme::RK4: return "rk4";
    case Scheme::NewtonHybrid: return "newton-hybrid";
    case Scheme::Calabi: return "calabi";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "euler") return Scheme::Euler;
  if (name == "rk4") return Scheme::RK4;
  if (name == "newton-hybrid") return Scheme::NewtonHybrid;
  if (name == "calabi") return Scheme::Calabi;
  throw std::invalid_argument("unknown scheme '" + name + "' (expected euler, rk4, newton-hybrid or calabi)");
}

std::string to_string(StepKind k) {
  switch (k) {
    case StepKind::Initial: return "initial";
    case StepKind::Explicit: return "explicit";
    case StepKind::Newton: return "newton";
    case StepKind::Calabi: return "calabi";
  }
  return "?";
}

std::string to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Converged: return "converged";
    case FlowStatus::MaxSteps: return "max_steps";
    case FlowStatus::Aborted: return "aborted";
  }
  return "?";
}

void FlowConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("step must be positive");
  if (step > 1.0) throw std::invalid_argument("step must not exceed 1 for explicit schemes");
  if (!(tol >= 1e-14) || !std::isfinite(tol)) throw std::invalid_argument("tol must be at least 1e-14");
  if (trace_every == 0) throw std::invalid_argument("trace_every must be at least 1");
  if (!(newton_switch > 0.0)) throw std::invalid_argument("newton_switch must be positive");
}

EdgeLengths ricci_step(const CuspedTriangulation& tri, const EdgeLengths& l, double h, Scheme scheme) {
  if (!(h > 0.0)) throw std::invalid_argument("ricci_step: h must be positive");
  switch (scheme) {
    case Scheme::Euler:
      return l + h * extended_curvature(tri, l);
    case Scheme::RK4: {
      const Eigen::VectorXd k1 = extended_curvature(tri, l);
      const Eigen::VectorXd k2 = extended_curvature(tri, l + 0.5 * h * k1);
      const Eigen::VectorXd k3 = extended_curvature(tri, l + 0.5 * h * k2);
      const Eigen::VectorXd k4 = extended_curvature(tri, l + h * k3);
      return l + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    default:
      throw std::invalid_argument("ricci_step: only euler and rk4 are explicit Ricci schemes");
  }
}

EdgeLengths calabi_step(const CuspedTriangulation& tri, const EdgeLengths& l, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("calabi_step: h must be positive");
  const Eigen::MatrixXd lap = laplacian(tri, l);
  return l - h * (lap * extended_curvature(tri, l));
}

FlowResult run_flow(const CuspedTriangulation& tri, const EdgeLengths& l0, const FlowConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(l0.size()) != tri.num_edges()) {
    throw std::invalid_argument("initial lengths have wrong size");
  }
  const CuspMatrix cusp = build_cusp_matrix(tri);

  FlowResult result;
  result.tol = cfg.tol;
  if (!l0.allFinite()) {
    result.status = FlowStatus::Aborted;
    result.message = "initial lengths are not finite";
    result.initial_l = l0;
    result.final_l = l0;
    return result;
  }
  result.initial_l = cfg.gauge_fix ? gauge_project(l0, cusp) : l0;

  Eigen::MatrixXd kernel;
  if (cfg.scheme == Scheme::NewtonHybrid) kernel = kernel_basis(cusp);
  const Eigen::VectorXd gauge0 = cusp * result.initial_l;

  FlowState state = evaluate(tri, result.initial_l);
  double h = cfg.step;
  double t = 0.0;
  std::size_t steps = 0;
  EdgeLengths last_traced = state.l;
  double pending_slack = 0.0;

  auto make_row = [&](StepKind kind) {
    TraceRow row;
    row.step = steps;
    row.t = t;
    row.knorm_inf = state.curv.curvature.lpNorm<Eigen::Infinity>();
    row.knorm_2 = state.curv.curvature.norm();
    row.energy = state.curv.energy;
    row.volume = state.curv.total_volume;
    row.degenerate_tets = state.curv.degenerate_count();
    row.kind = kind;
    if (steps > 0) row.energy_delta = energy_difference(tri, last_traced, state.l);
    row.descent_slack = pending_slack;
    if (cfg.record_lengths) row.lengths = state.l;
    last_traced = state.l;
    pending_slack = 0.0;
    return row;
  };

  result.trace.push_back(make_row(StepKind::Initial));
  StepKind last_kind = StepKind::Initial;

  while (true) {
    const double knorm = state.curv.curvature.lpNorm<Eigen::Infinity>();
    if (knorm < cfg.tol) {
      result.status = FlowStatus::Converged;
      break;
    }
    if (steps >= cfg.max_steps) {
      result.status = FlowStatus::MaxSteps;
      result.message = "max_steps reached with |K|_inf = " + std::to_string(knorm);
      break;
    }

    const double k2 = state.curv.curvature.squaredNorm();
    double h_used = h;
    std::optional<EdgeLengths> next;
    StepKind kind = StepKind::Explicit;

    std::optional<std::pair<EdgeLengths, double>> guarded;
    bool use_guard = false;
    switch (cfg.scheme) {
      case Scheme::Euler:
      case Scheme::RK4: {
        if (cfg.adaptive) {
          use_guard = true;
          guarded = descent_step(tri, state, h, cfg.scheme);
          if (guarded) h = guarded->second;  // keep the reduced step from here on
        } else {
          next = ricci_step(tri, state.l, h, cfg.scheme);
        }
        break;
      }
      case Scheme::Calabi: {
        use_guard = true;
        if (state.curv.degenerate_tets.empty()) {
          guarded = calabi_descent_step(tri, state, h);
          if (guarded) {
            kind = StepKind::Calabi;
            h = guarded->second;
          }
        }
        if (!guarded) guarded = descent_step(tri, state, h, Scheme::Euler);
        break;
      }
      case Scheme::NewtonHybrid: {
        if (state.curv.degenerate_tets.empty() && knorm < cfg.newton_switch) {
          next = newton_step(tri, state, kernel);
          if (next) {
            kind = StepKind::Newton;
            ++result.newton_steps;
          }
        }
        if (!next) {
          use_guard = true;
          guarded = descent_step(tri, state, h, Scheme::Euler);
        }
        break;
      }
    }
    if (use_guard) {
      if (!guarded) {
        result.status = FlowStatus::Aborted;
        result.message = "no energy-decreasing step found at |K|_inf = " + std::to_string(knorm);
      } else {
        next = std::move(guarded->first);
        h_used = guarded->second;
      }
    }
    if (result.status == FlowStatus::Aborted) break;

    state = evaluate(tri, std::move(*next));
    ++steps;
    t += h_used;
    pending_slack += 10.0 * h_used * h_used * k2;
    last_kind = kind;

    if (!finite_state(state)) {
      result.status = FlowStatus::Aborted;
      result.message = "non-finite state after step " + std::to_string(steps);
      break;
    }
    result.max_gauge_drift =
        std::max(result.max_gauge_drift, (cusp * state.l - gauge0).lpNorm<Eigen::Infinity>());

    if (steps % cfg.trace_every == 0) result.trace.push_back(make_row(kind));
  }

  if (result.status != FlowStatus::Aborted && result.trace.back().step != steps) {
    result.trace.push_back(make_row(last_kind));
  }

  result.final_l = state.l;
  result.steps_taken = steps;
  result.final_curvature_norm = state.curv.curvature.lpNorm<Eigen::Infinity>();
  result.final_volume = state.curv.total_volume;
  result.final_energy = state.curv.energy;
  result.final_degenerate_tets = state.curv.degenerate_count();
  result.converged = result.status == FlowStatus::Converged;
  return result;
}

std::vector<FlowResult> run_flows(const CuspedTriangulation& tri, const std::vector<EdgeLengths>& starts,
                                  const FlowConfig& cfg, unsigned threads) {
  cfg.validate();
  std::vector<FlowResult> results(starts.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(starts.size(), 1)));

  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < starts.size(); i += threads) results[i] = run_flow(tri, starts[i], cfg);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
  return results;
}

bool detect_equilibrium(const FlowResult& result, std::size_t window) {
  if (result.status != FlowStatus::Converged || !(result.final_curvature_norm < result.tol)) return false;
  const FlowTrace& trace = result.trace;
  if (trace.empty()) return false;
  const std::size_t n = std::min(window, trace.size());
  for (std::size_t i = trace.size() - n + 1; i < trace.size(); ++i) {
    if (trace[i].knorm_inf > trace[i - 1].knorm_inf) return false;
  }
  return true;
}

EdgeLengths random_lengths(std::size_t n, std::uint64_t seed, double range) {
  if (!(range >= 0.0)) throw std::invalid_argument("range must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-range, range);
  EdgeLengths l(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < l.size(); ++i) l(i) = dist(rng);
  return l;
}

}  // namespace cuspflow
