#include "cuspflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cuspflow {

namespace {

using json = nlohmann::json;

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

std::string quote(const std::string& s) { return json(s).dump(); }

void emit(const json& node, std::ostringstream& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (node.type()) {
    case json::value_t::object: {
      if (node.empty()) {
        out << "{}";
        return;
      }
      out << '{' << nl;
      bool first = true;
      for (auto it = node.begin(); it != node.end(); ++it) {
        if (!first) out << ',' << nl;
        first = false;
        out << pad << quote(it.key()) << (indent > 0 ? ": " : ":");
        emit(it.value(), out, indent, depth + 1);
      }
      out << nl << close_pad << '}';
      return;
    }
    case json::value_t::array: {
      if (node.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(node.begin(), node.end(), [](const json& v) { return v.is_primitive(); });
      out << '[';
      bool first = true;
      for (const json& v : node) {
        if (!first) out << (flat ? ", " : ",");
        if (!flat) out << nl << pad;
        first = false;
        emit(v, out, indent, depth + 1);
      }
      if (!flat) out << nl << close_pad;
      out << ']';
      return;
    }
    case json::value_t::number_float: {
      const double x = node.get<double>();
      if (std::isfinite(x)) {
        out << format_double(x);
      } else {
        out << "null";
      }
      return;
    }
    default:
      out << node.dump();
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

EdgeLengths parse_lengths_csv(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) throw std::invalid_argument("empty entry in length list '" + text + "'");
    const auto last = item.find_last_not_of(" \t\r\n");
    const std::string token = item.substr(first, last - first + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse length '" + token + "'");
    }
    if (used != token.size() || !std::isfinite(v)) throw std::invalid_argument("cannot parse length '" + token + "'");
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("length list is empty");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_trace_csv(std::ostream& out, const FlowTrace& trace, bool full) {
  out << "t,knorm_inf,knorm_2,energy,volume,degenerate_tets";
  Eigen::Index n = 0;
  if (full) {
    if (!trace.empty() && trace.front().lengths) n = trace.front().lengths->size();
    for (Eigen::Index i = 0; i < n; ++i) out << ",l" << i;
  }
  out << '\n';
  for (const TraceRow& row : trace) {
    out << format_double(row.t) << ',' << format_double(row.knorm_inf) << ',' << format_double(row.knorm_2) << ','
        << format_double(row.energy) << ',' << format_double(row.volume) << ',' << row.degenerate_tets;
    if (full) {
      if (!row.lengths) throw std::logic_error("trace row has no recorded lengths");
      for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double((*row.lengths)(i));
    }
    out << '\n';
  }
}

json to_json(const FlowConfig& cfg) {
  return json{{"scheme", to_string(cfg.scheme)},
              {"step", cfg.step},
              {"tol", cfg.tol},
              {"max_steps", cfg.max_steps},
              {"trace_every", cfg.trace_every},
              {"gauge_fix", cfg.gauge_fix},
              {"adaptive", cfg.adaptive},
              {"newton_switch", cfg.newton_switch}};
}

json to_json(const RunManifest& manifest) {
  json doc{{"input", manifest.input_path},
           {"config", to_json(manifest.config)},
           {"tool_version", manifest.tool_version},
           {"start_timestamp", manifest.start_timestamp}};
  doc["seed"] = manifest.seed ? json(*manifest.seed) : json(nullptr);
  doc["init_range"] = manifest.init_range ? json(*manifest.init_range) : json(nullptr);
  return doc;
}

json to_json(const FlowResult& result, bool include_trace) {
  json doc{{"initial_l", vector_json(result.initial_l)},
           {"final_l", vector_json(result.final_l)},
           {"converged", result.converged},
           {"status", to_string(result.status)},
           {"message", result.message},
           {"steps_taken", result.steps_taken},
           {"newton_steps", result.newton_steps},
           {"tol", result.tol},
           {"final_curvature_norm", result.final_curvature_norm},
           {"final_volume", result.final_volume},
           {"final_energy", result.final_energy},
           {"final_degenerate_tets", result.final_degenerate_tets},
           {"max_gauge_drift", result.max_gauge_drift}};
  if (include_trace) {
    json rows = json::array();
    for (const TraceRow& r : result.trace) {
      rows.push_back(json{{"step", r.step},
                          {"t", r.t},
                          {"knorm_inf", r.knorm_inf},
                          {"knorm_2", r.knorm_2},
                          {"energy", r.energy},
                          {"volume", r.volume},
                          {"degenerate_tets", r.degenerate_tets},
                          {"energy_delta", r.energy_delta},
                          {"kind", to_string(r.kind)}});
    }
    doc["trace"] = std::move(rows);
  }
  return doc;
}

std::string dump_json(const json& doc, int indent) {
  std::ostringstream out;
  emit(doc, out, indent, 0);
  out << '\n';
  return out.str();
}

}  // namespace cuspflow
