#include "cuspflow/triangulation.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace cuspflow {

namespace {

using json = nlohmann::json;

std::pair<int, int> sorted_pair(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

template <std::size_t K>
std::array<int, K> read_indices(const json& node, const char* key, std::size_t tet_index,
                                std::size_t bound) {
  if (!node.contains(key) || !node[key].is_array() || node[key].size() != K) {
    throw TriangulationError("tet " + std::to_string(tet_index) + ": field '" + key +
                             "' must be an array of " + std::to_string(K) + " integers");
  }
  std::array<int, K> out{};
  for (std::size_t k = 0; k < K; ++k) {
    const json& v = node[key][k];
    if (!v.is_number_integer()) {
      throw TriangulationError("tet " + std::to_string(tet_index) + ": " + key + "[" +
                               std::to_string(k) + "] is not an integer");
    }
    const long long idx = v.get<long long>();
    if (idx < 0 || static_cast<unsigned long long>(idx) >= bound) {
      throw TriangulationError("tet " + std::to_string(tet_index) + ": " + key + "[" +
                               std::to_string(k) + "] = " + std::to_string(idx) +
                               " out of range [0, " + std::to_string(bound) + ")");
    }
    out[k] = static_cast<int>(idx);
  }
  return out;
}

std::size_t read_count(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number_integer() || doc[key].get<long long>() < 0) {
    throw TriangulationError(std::string("field '") + key + "' must be a non-negative integer");
  }
  return doc[key].get<std::size_t>();
}

}  // namespace

CuspedTriangulation::CuspedTriangulation(std::size_t num_edges, std::size_t num_cusps,
                                         std::vector<Tet> tets, std::string name)
    : num_edges_(num_edges), num_cusps_(num_cusps), tets_(std::move(tets)), name_(std::move(name)) {
  if (tets_.empty()) throw TriangulationError("triangulation has no tetrahedra");
  std::set<long> ids;
  for (std::size_t j = 0; j < tets_.size(); ++j) {
    const Tet& t = tets_[j];
    for (int e : t.edge_slots) {
      if (e < 0 || static_cast<std::size_t>(e) >= num_edges_) {
        throw TriangulationError("tet " + std::to_string(j) + ": edge index " + std::to_string(e) +
                                 " out of range");
      }
    }
    for (int c : t.cusp_slots) {
      if (c < 0 || static_cast<std::size_t>(c) >= num_cusps_) {
        throw TriangulationError("tet " + std::to_string(j) + ": cusp index " + std::to_string(c) +
                                 " out of range");
      }
    }
    if (t.id && !ids.insert(*t.id).second) {
      throw TriangulationError("duplicate tet id " + std::to_string(*t.id));
    }
  }
}

std::vector<int> CuspedTriangulation::edge_degrees() const {
  std::vector<int> deg(num_edges_, 0);
  for (const Tet& t : tets_)
    for (int e : t.edge_slots) ++deg[static_cast<std::size_t>(e)];
  return deg;
}

CuspedTriangulation parse_triangulation(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& err) {
    throw TriangulationError(std::string("malformed triangulation document: ") + err.what());
  }
  if (!doc.is_object()) throw TriangulationError("triangulation document must be an object");

  const std::size_t num_edges = read_count(doc, "num_edges");
  const std::size_t num_cusps = read_count(doc, "num_cusps");
  if (!doc.contains("tets") || !doc["tets"].is_array()) {
    throw TriangulationError("field 'tets' must be an array");
  }
  if (doc["tets"].empty()) throw TriangulationError("triangulation has no tetrahedra");

  std::vector<Tet> tets;
  tets.reserve(doc["tets"].size());
  for (std::size_t j = 0; j < doc["tets"].size(); ++j) {
    const json& node = doc["tets"][j];
    if (!node.is_object()) throw TriangulationError("tet " + std::to_string(j) + " is not an object");
    Tet t;
    if (node.contains("id")) {
      if (!node["id"].is_number_integer()) {
        throw TriangulationError("tet " + std::to_string(j) + ": id must be an integer");
      }
      t.id = node["id"].get<long>();
    }
    t.edge_slots = read_indices<6>(node, "edges", j, num_edges);
    t.cusp_slots = read_indices<4>(node, "cusps", j, num_cusps);
    tets.push_back(t);
  }
  std::string name = doc.value("name", std::string{});
  return CuspedTriangulation(num_edges, num_cusps, std::move(tets), std::move(name));
}

CuspedTriangulation load_triangulation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "': file not found or unreadable");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_triangulation(buf.str());
}

ValidationReport validate(const CuspedTriangulation& tri) {
  ValidationReport report;
  report.edge_degrees = tri.edge_degrees();
  auto fail = [&](std::string msg) {
    report.ok = false;
    report.problems.push_back(std::move(msg));
  };

  for (std::size_t e = 0; e < tri.num_edges(); ++e) {
    if (report.edge_degrees[e] == 0) fail("edge " + std::to_string(e) + " is not referenced by any slot");
  }
  std::vector<bool> cusp_seen(tri.num_cusps(), false);
  for (const Tet& t : tri.tets())
    for (int c : t.cusp_slots) cusp_seen[static_cast<std::size_t>(c)] = true;
  for (std::size_t p = 0; p < tri.num_cusps(); ++p) {
    if (!cusp_seen[p]) fail("cusp " + std::to_string(p) + " is not referenced by any vertex");
  }
  if (tri.num_edges() != tri.num_tets()) {
    fail("number of edges (" + std::to_string(tri.num_edges()) + ") differs from number of tetrahedra (" +
         std::to_string(tri.num_tets()) + ")");
  }
  if (tri.num_cusps() == 0) fail("triangulation has no cusps");

  try {
    const CuspMatrix c = build_cusp_matrix(tri);
    report.cusp_rank = matrix_rank(c);
    if (*report.cusp_rank != static_cast<long>(tri.num_cusps())) {
      fail("rank(C) = " + std::to_string(*report.cusp_rank) + " but there are " +
           std::to_string(tri.num_cusps()) + " cusps");
    }
  } catch (const TriangulationError& err) {
    fail(err.what());
  }
  return report;
}

void require_valid(const CuspedTriangulation& tri) {
  const ValidationReport report = validate(tri);
  if (!report.ok) throw TriangulationError("invalid triangulation: " + report.problems.front());
}

IncidenceMatrix build_incidence(const CuspedTriangulation& tri) {
  const auto n = static_cast<Eigen::Index>(tri.num_edges());
  IncidenceMatrix g = IncidenceMatrix::Zero(n, static_cast<Eigen::Index>(kSlotCount * tri.num_tets()));
  for (std::size_t j = 0; j < tri.num_tets(); ++j)
    for (std::size_t slot = 0; slot < kSlotCount; ++slot)
      g(tri.tets()[j].edge_slots[slot], static_cast<Eigen::Index>(kSlotCount * j + slot)) = 1.0;
  return g;
}

CuspMatrix build_cusp_matrix(const CuspedTriangulation& tri) {
  std::vector<std::optional<std::pair<int, int>>> ends(tri.num_edges());
  for (std::size_t j = 0; j < tri.num_tets(); ++j) {
    const Tet& t = tri.tets()[j];
    for (std::size_t slot = 0; slot < kSlotCount; ++slot) {
      const auto [u, v] = kSlotVertices[slot];
      const auto here = sorted_pair(t.cusp_slots[static_cast<std::size_t>(u)],
                                    t.cusp_slots[static_cast<std::size_t>(v)]);
      auto& known = ends[static_cast<std::size_t>(t.edge_slots[slot])];
      if (!known) {
        known = here;
      } else if (*known != here) {
        throw TriangulationError("inconsistent gluing: edge " + std::to_string(t.edge_slots[slot]) +
                                 " has end cusps {" + std::to_string(known->first) + "," +
                                 std::to_string(known->second) + "} and {" + std::to_string(here.first) +
                                 "," + std::to_string(here.second) + "} (tet " + std::to_string(j) + ")");
      }
    }
  }
  CuspMatrix c = CuspMatrix::Zero(static_cast<Eigen::Index>(tri.num_cusps()),
                                  static_cast<Eigen::Index>(tri.num_edges()));
  for (std::size_t e = 0; e < ends.size(); ++e) {
    if (!ends[e]) continue;
    c(ends[e]->first, static_cast<Eigen::Index>(e)) += 1.0;
    c(ends[e]->second, static_cast<Eigen::Index>(e)) += 1.0;
  }
  return c;
}

long matrix_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  return static_cast<long>((sv.array() > rel_tol * sv(0)).count());
}

Eigen::MatrixXd kernel_basis(const CuspMatrix& cusp) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cusp, Eigen::ComputeFullV);
  const long rank = matrix_rank(cusp);
  const Eigen::Index n = cusp.cols();
  return svd.matrixV().rightCols(n - rank);
}

EdgeLengths gauge_project(const EdgeLengths& l, const CuspMatrix& cusp) {
  if (l.size() != cusp.cols()) throw std::invalid_argument("gauge_project: length vector has wrong size");
  const Eigen::MatrixXd gram = cusp * cusp.transpose();
  if (matrix_rank(gram) != gram.rows()) {
    throw TriangulationError("cusp matrix is rank deficient; C C^T is singular");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw TriangulationError("C C^T is not positive definite");
  const Eigen::VectorXd x = llt.solve(cusp * l);
  return l - cusp.transpose() * x;
}

double gauge_residual(const EdgeLengths& v, const CuspMatrix& cusp) {
  const Eigen::MatrixXd ct = cusp.transpose();
  const Eigen::VectorXd x = ct.colPivHouseholderQr().solve(v);
  return (v - ct * x).norm();
}

}  // namespace cuspflow
