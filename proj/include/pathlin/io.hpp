#pragma once

// JSON (schema_version 1) and CSV serialization for curves, tangent curves,
// cubes, point lists and reports. Loading validates shape and names the
// offending field; geometric validation happens in the operations.

#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathlin/cubemaps.hpp"
#include "pathlin/linearize.hpp"
#include "pathlin/models.hpp"

namespace pathlin::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Field access with named errors

inline const Json& field(const Json& j, const char* name, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  auto it = j.find(name);
  if (it == j.end()) throw ValidationError(where + ": missing field '" + name + "'");
  return *it;
}

inline double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + " must be a number");
  return j.get<double>();
}

inline long long integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ValidationError(where + " must be an integer");
  return j.get<long long>();
}

inline std::size_t index(const Json& j, const std::string& where) {
  const long long v = integer(j, where);
  if (v < 0) throw ValidationError(where + " must be non-negative");
  return static_cast<std::size_t>(v);
}

inline Vec vec(const Json& j, const std::string& where, Eigen::Index dim = -1) {
  if (!j.is_array()) throw ValidationError(where + " must be an array");
  if (dim >= 0 && static_cast<Eigen::Index>(j.size()) != dim) {
    throw ValidationError(where + " has " + std::to_string(j.size()) + " entries, expected " + std::to_string(dim));
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], where);
  return v;
}

inline Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Json to_json(const Point& p) { return Json{{"chart", p.chart}, {"coords", to_json(p.coords)}}; }

inline Point point(const Json& j, const ManifoldModel& model, const std::string& where) {
  Point p{static_cast<ChartId>(integer(field(j, "chart", where), where + ".chart")),
          vec(field(j, "coords", where), where + ".coords", model.dim())};
  if (p.chart < 0 || p.chart >= static_cast<ChartId>(model.charts().size())) {
    throw ValidationError(where + ".chart: unknown chart " + std::to_string(p.chart));
  }
  if (!p.coords.allFinite()) throw ValidationError(where + ".coords must be finite");
  if (model.domain_test(p.chart, p.coords) == Domain::outside) {
    throw ValidationError(where + " lies outside chart " + std::to_string(p.chart));
  }
  return p;
}

/// Columns as a list of component lists.
inline Json to_json(const Mat& columns) {
  Json a = Json::array();
  for (Eigen::Index c = 0; c < columns.cols(); ++c) a.push_back(to_json(Vec(columns.col(c))));
  return a;
}

inline Mat columns(const Json& j, Eigen::Index dim, const std::string& where) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
    throw ValidationError(where + " must list " + std::to_string(dim) + " columns");
  }
  Mat m(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    m.col(c) = vec(j[static_cast<std::size_t>(c)], where + "[" + std::to_string(c) + "]", dim);
  }
  return m;
}

inline Json to_json(const Grid& g) {
  if (g.is_uniform()) return Json{{"start", g.start()}, {"end", g.end()}, {"n", g.intervals()}};
  Json nodes = Json::array();
  for (double t : g.nodes()) nodes.push_back(t);
  return Json{{"nodes", nodes}};
}

/// {start, end, n} with n intervals, or {nodes: [...]}.
inline Grid grid(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  if (j.contains("nodes")) {
    const Json& nodes = j["nodes"];
    if (!nodes.is_array()) throw ValidationError(where + ".nodes must be an array");
    std::vector<double> t;
    for (const auto& x : nodes) t.push_back(number(x, where + ".nodes"));
    return Grid::from_nodes(std::move(t));
  }
  const double a = number(field(j, "start", where), where + ".start");
  const double b = number(field(j, "end", where), where + ".end");
  const long long n = integer(field(j, "n", where), where + ".n");
  if (n < 1) throw ValidationError(where + ".n must be >= 1");
  return Grid::uniform(a, b, static_cast<std::size_t>(n));
}

inline void check_header(const Json& j, const char* kind) {
  if (!j.is_object()) throw ValidationError("document must be a JSON object");
  const Json& v = field(j, "schema_version", "document");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
    throw ValidationError("schema_version must be " + std::to_string(kSchemaVersion));
  }
  if (j.contains("kind") && j["kind"] != kind) {
    throw ValidationError(std::string("expected kind '") + kind + "', got " + j["kind"].dump());
  }
}

inline Json header(const char* kind, const ManifoldModel& model) {
  return Json{{"schema_version", kSchemaVersion}, {"kind", kind}, {"manifold", model.name()}};
}

inline std::unique_ptr<ManifoldModel> model_of(const Json& j) {
  const Json& name = field(j, "manifold", "document");
  if (!name.is_string()) throw ValidationError("manifold must be a string");
  return make_model(name.get<std::string>());
}

// ---------------------------------------------------------------------------
// Documents

inline Json curve_to_json(const ManifoldModel& model, const SampledCurve& c) {
  Json j = header("curve", model);
  j["grid"] = to_json(c.grid);
  j["base_index"] = c.base_index;
  j["order"] = c.order;
  Json samples = Json::array();
  for (const auto& p : c.points) samples.push_back(to_json(p));
  j["samples"] = samples;
  return j;
}

inline SampledCurve curve_from_json(const Json& j, const ManifoldModel& model) {
  check_header(j, "curve");
  SampledCurve c;
  c.grid = grid(field(j, "grid", "curve"), "grid");
  c.base_index = j.contains("base_index") ? index(j["base_index"], "base_index") : 0;
  c.order = j.contains("order") ? static_cast<int>(integer(j["order"], "order")) : 3;
  const Json& samples = field(j, "samples", "curve");
  if (!samples.is_array()) throw ValidationError("samples must be an array");
  if (samples.size() != c.grid.size()) {
    throw ValidationError("samples has " + std::to_string(samples.size()) + " entries but grid has " +
                          std::to_string(c.grid.size()) + " nodes");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    c.points.push_back(point(samples[i], model, "samples[" + std::to_string(i) + "]"));
  }
  validate_curve(model, c);
  return c;
}

inline Json tangent_curve_to_json(const ManifoldModel& model, const TangentCurve& v) {
  Json j = header("tangent_curve", model);
  j["base"] = to_json(v.base);
  j["frame0"] = to_json(v.frame0.columns);
  j["grid"] = to_json(v.grid);
  j["base_index"] = v.base_index;
  j["order"] = v.order;
  Json comps = Json::array();
  for (const auto& c : v.components) comps.push_back(to_json(c));
  j["components"] = comps;
  return j;
}

inline TangentCurve tangent_curve_from_json(const Json& j, const ManifoldModel& model) {
  check_header(j, "tangent_curve");
  TangentCurve v;
  v.base = point(field(j, "base", "tangent_curve"), model, "base");
  v.frame0 = Frame{v.base, j.contains("frame0") ? columns(j["frame0"], model.dim(), "frame0")
                                                : orthonormal_frame(model, v.base).columns};
  v.grid = grid(field(j, "grid", "tangent_curve"), "grid");
  v.base_index = j.contains("base_index") ? index(j["base_index"], "base_index") : 0;
  v.order = j.contains("order") ? static_cast<int>(integer(j["order"], "order")) : 2;
  const Json& comps = field(j, "components", "tangent_curve");
  if (!comps.is_array()) throw ValidationError("components must be an array");
  if (comps.size() != v.grid.size()) {
    throw ValidationError("components has " + std::to_string(comps.size()) + " entries but grid has " +
                          std::to_string(v.grid.size()) + " nodes");
  }
  for (std::size_t i = 0; i < comps.size(); ++i) {
    v.components.push_back(vec(comps[i], "components[" + std::to_string(i) + "]", model.dim()));
  }
  validate_tangent_curve(model, v);
  return v;
}

inline Json cube_to_json(const ManifoldModel& model, const CubeSample& a) {
  Json j = header("cube", model);
  j["grid1"] = to_json(a.grid1);
  j["grid2"] = to_json(a.grid2);
  j["base1"] = a.base1;
  j["base2"] = a.base2;
  j["order"] = a.order;
  Json rows = Json::array();
  for (const auto& row : a.points) {
    Json r = Json::array();
    for (const auto& p : row) r.push_back(to_json(p));
    rows.push_back(r);
  }
  j["points"] = rows;
  return j;
}

inline CubeSample cube_from_json(const Json& j, const ManifoldModel& model) {
  check_header(j, "cube");
  CubeSample a;
  a.grid1 = grid(field(j, "grid1", "cube"), "grid1");
  a.grid2 = grid(field(j, "grid2", "cube"), "grid2");
  a.base1 = index(field(j, "base1", "cube"), "base1");
  a.base2 = index(field(j, "base2", "cube"), "base2");
  a.order = j.contains("order") ? static_cast<int>(integer(j["order"], "order")) : 3;
  const Json& rows = field(j, "points", "cube");
  if (!rows.is_array() || rows.size() != a.grid1.size()) {
    throw ValidationError("points must have one row per grid1 node (" + std::to_string(a.grid1.size()) + ")");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != a.grid2.size()) {
      throw ValidationError("points[" + std::to_string(i) + "] must have one entry per grid2 node (" +
                            std::to_string(a.grid2.size()) + ")");
    }
    std::vector<Point> row;
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      row.push_back(point(rows[i][k], model, "points[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
    }
    a.points.push_back(std::move(row));
  }
  validate_cube(model, a);
  return a;
}

inline Json cube_linearization_to_json(const ManifoldModel& model, const CubeLinearization& lin) {
  Json j = header("cube_linearization", model);
  j["base"] = to_json(lin.base);
  j["frame0"] = to_json(lin.frame0.columns);
  j["grid1"] = to_json(lin.v1.grid);
  j["grid2"] = to_json(lin.grid2);
  j["base1"] = lin.v1.base_index;
  j["base2"] = lin.base2;
  j["order"] = lin.v1.order;
  Json v1 = Json::array();
  for (const auto& c : lin.v1.components) v1.push_back(to_json(c));
  j["v1"] = v1;
  Json v2 = Json::array();
  for (const auto& row : lin.v2) {
    Json r = Json::array();
    for (const auto& c : row) r.push_back(to_json(c));
    v2.push_back(r);
  }
  j["v2"] = v2;
  return j;
}

inline CubeLinearization cube_linearization_from_json(const Json& j, const ManifoldModel& model) {
  check_header(j, "cube_linearization");
  CubeLinearization lin;
  lin.base = point(field(j, "base", "cube_linearization"), model, "base");
  lin.frame0 = Frame{lin.base, columns(field(j, "frame0", "cube_linearization"), model.dim(), "frame0")};
  lin.v1.base = lin.base;
  lin.v1.frame0 = lin.frame0;
  lin.v1.grid = grid(field(j, "grid1", "cube_linearization"), "grid1");
  lin.grid2 = grid(field(j, "grid2", "cube_linearization"), "grid2");
  lin.v1.base_index = index(field(j, "base1", "cube_linearization"), "base1");
  lin.base2 = index(field(j, "base2", "cube_linearization"), "base2");
  lin.v1.order = j.contains("order") ? static_cast<int>(integer(j["order"], "order")) : 2;
  const Json& v1 = field(j, "v1", "cube_linearization");
  if (!v1.is_array() || v1.size() != lin.v1.grid.size()) {
    throw ValidationError("v1 must have one entry per grid1 node (" + std::to_string(lin.v1.grid.size()) + ")");
  }
  for (std::size_t i = 0; i < v1.size(); ++i) {
    lin.v1.components.push_back(vec(v1[i], "v1[" + std::to_string(i) + "]", model.dim()));
  }
  const Json& v2 = field(j, "v2", "cube_linearization");
  if (!v2.is_array() || v2.size() != lin.v1.grid.size()) {
    throw ValidationError("v2 must have one row per grid1 node (" + std::to_string(lin.v1.grid.size()) + ")");
  }
  for (std::size_t i = 0; i < v2.size(); ++i) {
    if (!v2[i].is_array() || v2[i].size() != lin.grid2.size()) {
      throw ValidationError("v2[" + std::to_string(i) + "] must have one entry per grid2 node (" +
                            std::to_string(lin.grid2.size()) + ")");
    }
    std::vector<Vec> row;
    for (std::size_t k = 0; k < v2[i].size(); ++k) {
      row.push_back(vec(v2[i][k], "v2[" + std::to_string(i) + "][" + std::to_string(k) + "]", model.dim()));
    }
    lin.v2.push_back(std::move(row));
  }
  if (lin.base2 >= lin.grid2.size()) throw ValidationError("base2 out of range");
  validate_tangent_curve(model, lin.v1);
  return lin;
}

inline Json points_to_json(const ManifoldModel& model, const std::vector<Point>& pts) {
  Json j = header("points", model);
  Json a = Json::array();
  for (const auto& p : pts) a.push_back(to_json(p));
  j["points"] = a;
  return j;
}

inline std::vector<Point> points_from_json(const Json& j, const ManifoldModel& model) {
  check_header(j, "points");
  const Json& a = field(j, "points", "points document");
  if (!a.is_array()) throw ValidationError("points must be an array");
  std::vector<Point> out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(point(a[i], model, "points[" + std::to_string(i) + "]"));
  return out;
}

inline Json switch_log_to_json(const std::vector<ChartSwitch>& log) {
  Json a = Json::array();
  for (const auto& s : log) a.push_back(Json{{"node", s.node}, {"from", s.from}, {"to", s.to}});
  return a;
}

// ---------------------------------------------------------------------------
// Files

inline Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

// ---------------------------------------------------------------------------
// CSV: t, coords..., chart

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string csv_header(const char* t, const char* prefix, Eigen::Index dim, bool chart = true) {
  std::string s = t;
  for (Eigen::Index i = 0; i < dim; ++i) s += std::string(",") + prefix + std::to_string(i);
  if (chart) s += ",chart";
  return s + "\n";
}

inline std::string curve_csv(const ManifoldModel& model, const SampledCurve& c) {
  std::string s = csv_header("t", "x", model.dim());
  for (std::size_t j = 0; j < c.points.size(); ++j) {
    s += fmt(c.grid[j]);
    for (Eigen::Index i = 0; i < c.points[j].coords.size(); ++i) s += "," + fmt(c.points[j].coords(i));
    s += "," + std::to_string(c.points[j].chart) + "\n";
  }
  return s;
}

inline std::string tangent_curve_csv(const ManifoldModel& model, const TangentCurve& v) {
  std::string s = csv_header("t", "v", model.dim(), false);
  for (std::size_t j = 0; j < v.components.size(); ++j) {
    s += fmt(v.grid[j]);
    for (Eigen::Index i = 0; i < v.components[j].size(); ++i) s += "," + fmt(v.components[j](i));
    s += "\n";
  }
  return s;
}

inline std::string cube_csv(const ManifoldModel& model, const CubeSample& a) {
  std::string s = "s1," + csv_header("s2", "x", model.dim());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    for (std::size_t k = 0; k < a.points[i].size(); ++k) {
      const Point& p = a.points[i][k];
      s += fmt(a.grid1[i]) + "," + fmt(a.grid2[k]);
      for (Eigen::Index d = 0; d < p.coords.size(); ++d) s += "," + fmt(p.coords(d));
      s += "," + std::to_string(p.chart) + "\n";
    }
  }
  return s;
}

inline std::string points_csv(const ManifoldModel& model, const std::vector<Point>& pts) {
  std::string s = csv_header("index", "x", model.dim());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    s += std::to_string(j);
    for (Eigen::Index i = 0; i < pts[j].coords.size(); ++i) s += "," + fmt(pts[j].coords(i));
    s += "," + std::to_string(pts[j].chart) + "\n";
  }
  return s;
}

}  // namespace pathlin::io
