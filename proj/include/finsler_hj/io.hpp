#pragma once

// CSV serialization of fields. Every file starts with
//
//   nx,ny,h,ox,oy
//   <nx>,<ny>,<h>,<ox>,<oy>
//   <column names>
//
// followed by one row per node (ScalarField), per cell (VectorField: vx,vy)
// or per boundary node (BoundaryMeasure: node,weight). Numbers are written
// with 17 significant digits so a write/read round trip is exact.

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finsler_hj/distance.hpp"
#include "finsler_hj/error.hpp"
#include "finsler_hj/geometry.hpp"

namespace finsler_hj::io {

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

inline std::string grid_header(const Grid& g, const char* columns) {
  std::string s = "nx,ny,h,ox,oy\n";
  s += std::to_string(g.nx()) + "," + std::to_string(g.ny()) + "," + format_number(g.h()) + "," +
       format_number(g.origin().x) + "," + format_number(g.origin().y) + "\n";
  s += columns;
  s += "\n";
  return s;
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& file, std::size_t line) {
  const char* begin = s.c_str();
  while (*begin == ' ' || *begin == '\t') ++begin;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  while (end != nullptr && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw ParseError(file + ":" + std::to_string(line) + ": not a number: '" + s + "'", file, line);
  }
  return v;
}

struct CsvTable {
  Grid grid;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_table(const std::filesystem::path& path, std::size_t columns) {
  std::ifstream in(path);
  const std::string file = path.string();
  if (!in) throw MissingArtifact("missing artifact " + path.filename().string());
  std::string line;
  std::size_t no = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) throw ParseError(file + ": truncated before " + what, file, no + 1);
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  next("header");
  if (line != "nx,ny,h,ox,oy") throw ParseError(file + ":1: expected header 'nx,ny,h,ox,oy'", file, 1);
  next("grid line");
  const auto g = split(line);
  if (g.size() != 5) throw ParseError(file + ":2: expected five grid values", file, 2);
  const double nx = parse_double(g[0], file, 2);
  const double ny = parse_double(g[1], file, 2);
  if (nx != static_cast<int>(nx) || ny != static_cast<int>(ny)) {
    throw ParseError(file + ":2: nx and ny must be integers", file, 2);
  }
  CsvTable t{Grid(static_cast<int>(nx), static_cast<int>(ny), parse_double(g[2], file, 2),
                  {parse_double(g[3], file, 2), parse_double(g[4], file, 2)}),
             {}};
  next("column names");
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != columns) {
      throw ParseError(file + ":" + std::to_string(no) + ": expected " + std::to_string(columns) + " columns", file, no);
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, file, no));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace detail

inline void write_csv(const std::filesystem::path& path, const ScalarField& f) {
  std::string s = detail::grid_header(f.grid(), f.units().empty() ? "value" : f.units().c_str());
  for (double v : f.values()) {
    s += format_number(v);
    s += '\n';
  }
  detail::write_text(path, s);
}

inline void write_csv(const std::filesystem::path& path, const VectorField& f) {
  std::string s = detail::grid_header(f.grid(), "vx,vy");
  for (const Vec2& v : f.values()) s += format_number(v.x) + "," + format_number(v.y) + "\n";
  detail::write_text(path, s);
}

inline void write_csv(const std::filesystem::path& path, const BoundaryMeasure& m) {
  std::string s = detail::grid_header(m.grid(), "node,weight");
  const auto nodes = m.grid().boundary_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) s += std::to_string(nodes[k]) + "," + format_number(m[k]) + "\n";
  detail::write_text(path, s);
}

inline ScalarField read_scalar_field(const std::filesystem::path& path) {
  auto t = detail::read_table(path, 1);
  if (t.rows.size() != static_cast<std::size_t>(t.grid.node_count())) {
    throw GridMismatch(path.string() + ": " + std::to_string(t.rows.size()) + " rows for " +
                       std::to_string(t.grid.node_count()) + " nodes");
  }
  std::vector<double> v;
  v.reserve(t.rows.size());
  for (const auto& r : t.rows) v.push_back(r[0]);
  return {t.grid, std::move(v)};
}

inline VectorField read_vector_field(const std::filesystem::path& path) {
  auto t = detail::read_table(path, 2);
  if (t.rows.size() != static_cast<std::size_t>(t.grid.cell_count())) {
    throw GridMismatch(path.string() + ": " + std::to_string(t.rows.size()) + " rows for " +
                       std::to_string(t.grid.cell_count()) + " cells");
  }
  std::vector<Vec2> v;
  v.reserve(t.rows.size());
  for (const auto& r : t.rows) v.push_back({r[0], r[1]});
  return {t.grid, std::move(v)};
}

inline BoundaryMeasure read_boundary_measure(const std::filesystem::path& path) {
  auto t = detail::read_table(path, 2);
  const auto nodes = t.grid.boundary_nodes();
  if (t.rows.size() != nodes.size()) throw GridMismatch(path.string() + ": boundary row count mismatch");
  std::vector<double> w;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (t.rows[k][0] != nodes[k]) {
      throw ParseError(path.string() + ": row " + std::to_string(k + 4) + " is not boundary node " +
                           std::to_string(nodes[k]),
                       path.string(), k + 4);
    }
    w.push_back(t.rows[k][1]);
  }
  return {t.grid, std::move(w)};
}

// Node-sampled parameter with `columns` numbers per node (e.g. a11,a12,a21,a22).
inline std::pair<Grid, std::vector<std::vector<double>>> read_node_table(const std::filesystem::path& path,
                                                                         std::size_t columns) {
  auto t = detail::read_table(path, columns);
  if (t.rows.size() != static_cast<std::size_t>(t.grid.node_count())) {
    throw GridMismatch(path.string() + ": row count does not match node count");
  }
  return {t.grid, std::move(t.rows)};
}

inline nlohmann::json distance_sidecar(const DistanceField& d) {
  return {{"sources", d.sources},
          {"stencil", static_cast<int>(d.stencil)},
          {"direction", d.direction == Direction::FromSource ? "from_source" : "to_source"}};
}

// DistanceField as <path>.csv plus <path>.json describing sources and stencil.
inline void write_distance_field(const std::filesystem::path& csv_path, const DistanceField& d) {
  write_csv(csv_path, d.values);
  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  detail::write_text(sidecar, distance_sidecar(d).dump(2) + "\n");
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  detail::write_text(path, j.dump(2) + "\n");
}

}  // namespace finsler_hj::io
