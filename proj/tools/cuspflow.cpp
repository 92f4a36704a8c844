// cuspflow: validate ideal triangulations, inspect tetrahedra and curvature,
// and run the extended Ricci flow to the complete hyperbolic metric.
//
//   cuspflow validate <file>
//   cuspflow angles <file> --lengths <csv>
//   cuspflow report <file> --lengths <csv>
//   cuspflow flow <file> [--lengths <csv> | --random-init <seed> --range <r>]
//                 [--scheme S] [--step H] [--tol T] [--max-steps M]
//                 [--trace out.csv [--trace-full]] [--result out.json]
//
// Exit codes: 0 success, 1 validation or I/O failure, 2 usage error.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cuspflow/assembly.hpp"
#include "cuspflow/flow.hpp"
#include "cuspflow/io.hpp"
#include "cuspflow/tetra.hpp"
#include "cuspflow/triangulation.hpp"

namespace {

using namespace cuspflow;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// --lengths takes either an inline list or the path of a file holding one.
EdgeLengths read_lengths(const std::string& arg, std::size_t expected) {
  std::string text = arg;
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) {
    std::ifstream in(arg);
    if (!in) throw std::ios_base::failure("cannot open '" + arg + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  }
  EdgeLengths l;
  try {
    l = parse_lengths_csv(text);
  } catch (const std::invalid_argument& err) {
    throw UsageError(err.what());
  }
  if (static_cast<std::size_t>(l.size()) != expected) {
    throw UsageError("expected " + std::to_string(expected) + " edge lengths, got " + std::to_string(l.size()));
  }
  return l;
}

CuspedTriangulation load_valid(const std::string& path) {
  CuspedTriangulation tri = load_triangulation(path);
  require_valid(tri);
  return tri;
}

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

int cmd_validate(const std::string& path) {
  const CuspedTriangulation tri = load_triangulation(path);
  const ValidationReport report = validate(tri);
  if (!tri.name().empty()) std::cout << "name: " << tri.name() << '\n';
  std::cout << "tets: " << tri.num_tets() << '\n';
  std::cout << "N=" << tri.num_edges() << '\n';
  std::cout << "s=" << tri.num_cusps() << '\n';
  std::cout << "edge degrees:";
  for (int d : report.edge_degrees) std::cout << ' ' << d;
  std::cout << '\n';
  if (report.cusp_rank) {
    std::cout << "rank(C)=" << *report.cusp_rank << '\n';
  } else {
    std::cout << "rank(C)=undefined\n";
  }
  for (const auto& p : report.problems) std::cout << "problem: " << p << '\n';
  std::cout << (report.ok ? "PASS" : "FAIL") << '\n';
  return report.ok ? kExitOk : kExitFailure;
}

int cmd_angles(const std::string& path, const std::string& lengths_arg) {
  const CuspedTriangulation tri = load_valid(path);
  const EdgeLengths l = read_lengths(lengths_arg, tri.num_edges());
  std::cout << "tet,region,a12,a13,a14,a34,a24,a23,volume\n";
  for (std::size_t j = 0; j < tri.num_tets(); ++j) {
    const TetMetric m = tet_metric(tri, l, j);
    const DihedralAngles alpha = extended_angles(m);
    std::cout << j << ',' << to_string(classify(m));
    for (double a : alpha) std::cout << ',' << format_double(a);
    std::cout << ',' << format_double(tet_volume(m)) << '\n';
  }
  return kExitOk;
}

int cmd_report(const std::string& path, const std::string& lengths_arg) {
  const CuspedTriangulation tri = load_valid(path);
  const EdgeLengths l = read_lengths(lengths_arg, tri.num_edges());
  const CurvatureState state = curvature_with_laplacian(tri, l);
  json doc{{"input", path},
           {"lengths", vector_json(l)},
           {"curvature", vector_json(state.curvature)},
           {"curvature_norm_inf", state.curvature.lpNorm<Eigen::Infinity>()},
           {"energy", state.energy},
           {"total_volume", state.total_volume},
           {"degenerate_tets", state.degenerate_tets}};
  if (state.laplacian) {
    const LaplacianSpectrum spec = analyze_laplacian(*state.laplacian, build_cusp_matrix(tri));
    doc["laplacian"] = json{{"min_eigenvalue", spec.min_eigenvalue},
                            {"max_eigenvalue", spec.max_eigenvalue},
                            {"kernel_dimension", spec.kernel_dimension},
                            {"max_eigenvalue_on_ker_c", spec.max_eigenvalue_on_kernel_of_c},
                            {"cusp_residual", spec.cusp_residual}};
  } else {
    doc["laplacian"] = nullptr;
  }
  std::cout << dump_json(doc);
  return kExitOk;
}

struct FlowOptions {
  std::string lengths;
  std::optional<std::uint64_t> seed;
  double range = 1.0;
  std::string scheme = "newton-hybrid";
  FlowConfig cfg;
  std::string trace_path;
  bool trace_full = false;
  std::string result_path;
};

int cmd_flow(const std::string& path, FlowOptions opt) {
  try {
    opt.cfg.scheme = parse_scheme(opt.scheme);
    opt.cfg.validate();
  } catch (const std::invalid_argument& err) {
    throw UsageError(err.what());
  }
  const std::string started = utc_timestamp();
  const CuspedTriangulation tri = load_valid(path);

  EdgeLengths l0;
  if (!opt.lengths.empty()) {
    l0 = read_lengths(opt.lengths, tri.num_edges());
  } else if (opt.seed) {
    l0 = random_lengths(tri.num_edges(), *opt.seed, opt.range);
  } else {
    l0 = EdgeLengths::Zero(static_cast<Eigen::Index>(tri.num_edges()));
  }
  opt.cfg.record_lengths = opt.trace_full;

  const FlowResult result = run_flow(tri, l0, opt.cfg);

  if (!opt.trace_path.empty()) {
    std::ofstream out(opt.trace_path);
    if (!out) throw std::ios_base::failure("cannot write '" + opt.trace_path + "'");
    write_trace_csv(out, result.trace, opt.trace_full);
  }

  RunManifest manifest;
  manifest.input_path = path;
  manifest.config = opt.cfg;
  manifest.seed = opt.seed;
  if (opt.seed) manifest.init_range = opt.range;
  manifest.start_timestamp = started;
  json doc = to_json(result, false);
  doc["manifest"] = to_json(manifest);
  doc["trace_rows"] = result.trace.size();

  if (!opt.result_path.empty()) {
    std::ofstream out(opt.result_path);
    if (!out) throw std::ios_base::failure("cannot write '" + opt.result_path + "'");
    out << dump_json(doc);
    std::cout << "status: " << to_string(result.status) << '\n'
              << "converged=" << (result.converged ? "true" : "false") << '\n'
              << "steps: " << result.steps_taken << '\n'
              << "|K|_inf: " << format_double(result.final_curvature_norm) << '\n'
              << "volume: " << format_double(result.final_volume) << '\n';
    if (result.converged && result.final_degenerate_tets > 0) {
      std::cout << "note: limit has " << result.final_degenerate_tets
                << " degenerate tetrahedra; no complete hyperbolic metric on this triangulation\n";
    }
  } else {
    std::cout << dump_json(doc);
  }
  if (result.status == FlowStatus::Aborted) {
    std::cerr << "error: flow aborted: " << result.message << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extended combinatorial Ricci flow on ideally triangulated cusped 3-manifolds", "cuspflow"};
  app.set_version_flag("--version", std::string("cuspflow ") + kToolVersion + " (triangulation format 1)");
  app.require_subcommand(1);

  std::string file;
  std::string lengths;

  auto* validate_cmd = app.add_subcommand("validate", "Check a triangulation file");
  validate_cmd->add_option("file", file, "Triangulation file")->required();

  auto* angles_cmd = app.add_subcommand("angles", "Per-tetrahedron angles, region class and volume");
  angles_cmd->add_option("file", file, "Triangulation file")->required();
  angles_cmd->add_option("--lengths", lengths, "Edge lengths: comma-separated list or file")->required();

  auto* report_cmd = app.add_subcommand("report", "Curvature, energy, volume and Laplacian summary");
  report_cmd->add_option("file", file, "Triangulation file")->required();
  report_cmd->add_option("--lengths", lengths, "Edge lengths: comma-separated list or file")->required();

  FlowOptions fopt;
  std::uint64_t seed = 0;
  auto* flow_cmd = app.add_subcommand("flow", "Run the extended Ricci flow");
  flow_cmd->add_option("file", file, "Triangulation file")->required();
  auto* lengths_opt = flow_cmd->add_option("--lengths", fopt.lengths, "Initial edge lengths");
  auto* seed_opt = flow_cmd->add_option("--random-init", seed, "Seed for uniform random initial lengths");
  seed_opt->excludes(lengths_opt);
  flow_cmd->add_option("--range", fopt.range, "Half-width r of the random initial box [-r, r]^N")
      ->check(CLI::NonNegativeNumber);
  flow_cmd->add_option("--scheme", fopt.scheme, "euler | rk4 | newton-hybrid | calabi");
  flow_cmd->add_option("--step", fopt.cfg.step, "Time step h");
  flow_cmd->add_option("--tol", fopt.cfg.tol, "Stop when |K|_inf < tol");
  flow_cmd->add_option("--max-steps", fopt.cfg.max_steps, "Step budget");
  flow_cmd->add_option("--trace-every", fopt.cfg.trace_every, "Record every n-th step");
  flow_cmd->add_flag("--adaptive", fopt.cfg.adaptive, "Halve h when an explicit step overshoots in energy");
  flow_cmd->add_flag("!--no-gauge-fix", fopt.cfg.gauge_fix, "Keep the initial decoration");
  flow_cmd->add_option("--trace", fopt.trace_path, "Trace CSV output path");
  flow_cmd->add_flag("--trace-full", fopt.trace_full, "Append edge lengths to the trace");
  flow_cmd->add_option("--result", fopt.result_path, "Result JSON output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(file);
    if (*angles_cmd) return cmd_angles(file, lengths);
    if (*report_cmd) return cmd_report(file, lengths);
    if (*flow_cmd) {
      if (*seed_opt) fopt.seed = seed;
      return cmd_flow(file, fopt);
    }
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const std::ios_base::failure& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
