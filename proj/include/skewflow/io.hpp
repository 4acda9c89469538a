#pragma once

// JSON and CSV serialization of reports and convergence tables.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewflow/errors.hpp"
#include "skewflow/geometry.hpp"
#include "skewflow/verify.hpp"

namespace skewflow::io {

using nlohmann::ordered_json;

/// {name, params, norms, rows, observed_order}; rows is empty for a Report.
inline ordered_json to_json(const verify::Report& r) {
  ordered_json j;
  j["name"] = r.name;
  ordered_json params = ordered_json::object();
  params["grid_sizes"] = r.grid_sizes;
  params["dt"] = r.dt;
  for (const auto& [k, v] : r.metadata) params[k] = v;
  j["params"] = params;
  ordered_json norms = ordered_json::object();
  norms["max"] = r.max_norm;
  norms["l2"] = r.l2_norm;
  for (const auto& [k, v] : r.extra) norms[k] = v;
  j["norms"] = norms;
  j["rows"] = ordered_json::array();
  j["observed_order"] = nullptr;
  return j;
}

inline ordered_json to_json(const verify::ConvergenceTable& t) {
  ordered_json j;
  j["name"] = t.name;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : t.params) params[k] = v;
  j["params"] = params;
  ordered_json norms = ordered_json::object();
  if (!t.rows.empty()) norms["finest"] = t.rows.back().residual;
  j["norms"] = norms;
  j["rows"] = ordered_json::array();
  for (const auto& r : t.rows) j["rows"].push_back({{"resolution", r.resolution}, {"h", r.h}, {"residual", r.residual}});
  j["observed_order"] = t.observed_order ? ordered_json(*t.observed_order) : ordered_json(nullptr);
  j["status"] = t.status;
  return j;
}

inline void write_json(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

/// One row per node: node, grid coordinates, residual.
template <int M>
void write_residual_csv(const std::string& path, const verify::Report& r, const geometry::PeriodicGrid<M>& grid) {
  if (r.residual.size() != grid.node_count()) throw InvalidInput("residual field does not match the grid");
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out.precision(17);
  out << "node";
  for (int d = 0; d < M; ++d) out << ",i" << (d + 1);
  out << ",residual\n";
  for (std::size_t i = 0; i < r.residual.size(); ++i) {
    out << i;
    for (int c : grid.coords(i)) out << "," << c;
    out << "," << r.residual[i] << "\n";
  }
}

/// Minimal CSV writer with a fixed header; rows must match the header width.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> header) : out_(path), width_(header.size()) {
    if (!out_) throw InvalidInput("cannot write '" + path + "'");
    out_.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    if (values.size() != width_) throw InvalidInput("CSV row width does not match header");
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
  std::size_t width_;
};

}  // namespace skewflow::io
