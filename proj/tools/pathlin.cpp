// pathlin command-line front end.
//
// Every command parses and validates all inputs first, computes, and only
// then writes files and prints its JSON report (stdout). Exit codes: 0 ok,
// 2 validation, 3 numerical failure or a failed tolerance.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pathlin/io.hpp"
#include "pathlin/pathlin.hpp"
#include "pathlin/suite.hpp"

namespace {

using namespace pathlin;
using io::Json;

struct Globals {
  int substeps = 2;
  bool report_only = false;
  std::uint64_t seed = 0;
  std::string csv;
};

struct Outcome {
  Json report;
  std::vector<std::pair<std::string, std::string>> files;
  bool failed = false;
};

TransportOptions transport_options(const Globals& g) {
  TransportOptions t;
  t.substeps = g.substeps;
  return t;
}

class Report {
 public:
  Report(std::string command, Json args, const Globals& g) {
    j_["schema_version"] = io::kSchemaVersion;
    j_["kind"] = "report";
    j_["command"] = Json{{"name", std::move(command)}, {"args", std::move(args)}};
    j_["tolerances"] = Json{{"n_substeps", g.substeps}, {"tolerance_report_only", g.report_only}};
    j_["metrics"] = Json::object();
    j_["switch_log"] = Json::array();
    j_["invariants"] = Json::array();
  }

  void metric(const std::string& k, Json v) { j_["metrics"][k] = std::move(v); }
  void set(const std::string& k, Json v) { j_[k] = std::move(v); }
  void switches(const std::vector<ChartSwitch>& log) { j_["switch_log"] = io::switch_log_to_json(log); }

  void invariant(const std::string& name, double value, double tol) {
    const bool pass = std::isfinite(value) && value < tol;
    j_["tolerances"][name] = tol;
    j_["invariants"].push_back(Json{{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", pass}});
    failed_ = failed_ || !pass;
  }

  Outcome finish() {
    j_["pass"] = !failed_;
    return Outcome{std::move(j_), {}, failed_};
  }

 private:
  Json j_;
  bool failed_ = false;
};

/// "x,y" (chart 0) or "c:x,y".
Point parse_point(const std::string& text, const ManifoldModel& model, const std::string& what) {
  std::string body = text;
  ChartId chart = 0;
  const auto colon = text.find(':');
  try {
    if (colon != std::string::npos) {
      chart = std::stoi(text.substr(0, colon));
      body = text.substr(colon + 1);
    }
    std::vector<double> xs;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      xs.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    }
    Json j{{"chart", chart}, {"coords", xs}};
    return io::point(j, model, what);
  } catch (const std::invalid_argument&) {
    throw ValidationError(what + ": cannot parse '" + text + "', expected x,y or chart:x,y");
  } catch (const std::out_of_range&) {
    throw ValidationError(what + ": cannot parse '" + text + "'");
  }
}

Frame choose_frame(const ManifoldModel& model, const Point& p, const std::string& kind) {
  if (kind == "orthonormal") return orthonormal_frame(model, p);
  if (kind == "coordinate") return coordinate_frame(model, p);
  throw ValidationError("--frame must be orthonormal or coordinate");
}

std::vector<ChartSwitch> concat(std::vector<ChartSwitch> a, const std::vector<ChartSwitch>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void add_csv(Outcome& o, const Globals& g, std::string text) {
  if (!g.csv.empty()) o.files.emplace_back(g.csv, std::move(text));
}

void require_output(const std::string& out, const char* command) {
  if (out.empty()) throw ValidationError(std::string(command) + " needs --output");
}

// ---------------------------------------------------------------------------

Outcome cmd_models(const std::string& describe) {
  if (describe.empty()) {
    Json names = Json::array();
    for (const auto& n : model_names()) names.push_back(n);
    return Outcome{Json{{"schema_version", io::kSchemaVersion}, {"kind", "model_list"}, {"models", names}}, {}, false};
  }
  const auto model = make_model(describe);
  Json charts = Json::array();
  for (const auto& c : model->charts()) {
    charts.push_back(Json{{"id", c.id},
                          {"name", c.name},
                          {"center", io::to_json(c.center)},
                          {"trust_radius", c.trust_radius},
                          {"description", c.description}});
  }
  const auto& c0 = model->charts().front();
  Json j{{"schema_version", io::kSchemaVersion},
         {"kind", "model_manifest"},
         {"name", model->name()},
         {"description", model->description()},
         {"dim", model->dim()},
         {"charts", charts},
         {"r0_at_chart0_center", model->r0(Point{c0.id, c0.center})},
         {"oracle", model->has_oracle()},
         {"comparison_metric", distance_kind(*model)},
         {"point_format", "{chart, coords}; tangent components in the chart's coordinate basis"}};
  return Outcome{j, {}, false};
}

Outcome cmd_linearize(const Globals& g, const std::string& in, const std::string& out, const std::string& frame) {
  require_output(out, "linearize");
  const Json doc = io::read_json(in);
  const auto model = io::model_of(doc);
  const SampledCurve curve = io::curve_from_json(doc, *model);
  const Frame f0 = choose_frame(*model, curve.base(), frame);

  const LinearizationReport rep = p_forward(*model, curve, f0, transport_options(g));
  Report r("linearize", Json{{"input", in}, {"output", out}, {"frame", frame}}, g);
  r.set("comparison_metric", distance_kind(*model));
  r.metric("norm_drift", rep.norm_drift);
  r.metric("h", rep.h);
  r.metric("nodes", curve.points.size());
  r.switches(rep.switch_log);
  r.invariant("norm_drift", rep.norm_drift, 1e-4);
  Outcome o = r.finish();
  o.files.emplace_back(out, io::dump(io::tangent_curve_to_json(*model, rep.tangent_curve)));
  add_csv(o, g, io::tangent_curve_csv(*model, rep.tangent_curve));
  return o;
}

Outcome cmd_synthesize(const Globals& g, const std::string& in, const std::string& out) {
  require_output(out, "synthesize");
  const Json doc = io::read_json(in);
  const auto model = io::model_of(doc);
  const TangentCurve v = io::tangent_curve_from_json(doc, *model);
  require_differentiable(v.grid);

  const InverseResult res = p_inverse(*model, v, transport_options(g));
  Report r("synthesize", Json{{"input", in}, {"output", out}}, g);
  r.set("comparison_metric", distance_kind(*model));
  r.metric("nodes", v.components.size());
  r.switches(res.frames.switch_log);
  Outcome o = r.finish();
  o.files.emplace_back(out, io::dump(io::curve_to_json(*model, res.curve)));
  add_csv(o, g, io::curve_csv(*model, res.curve));
  return o;
}

Outcome cmd_roundtrip(const Globals& g, const std::string& in, const std::string& out) {
  const Json doc = io::read_json(in);
  const auto model = io::model_of(doc);
  const SampledCurve curve = io::curve_from_json(doc, *model);
  require_differentiable(curve.grid);

  const TransportOptions t = transport_options(g);
  const LinearizationReport fwd = p_forward(*model, curve, t);
  const InverseResult back = p_inverse(*model, fwd.tangent_curve, t);
  const double err = max_curve_distance(*model, back.curve, curve);
  Report r("roundtrip", Json{{"input", in}, {"output", out}}, g);
  r.set("comparison_metric", distance_kind(*model));
  r.metric("roundtrip_error", err);
  r.metric("norm_drift", fwd.norm_drift);
  r.metric("nodes", curve.points.size());
  r.switches(concat(fwd.switch_log, back.frames.switch_log));
  r.invariant("roundtrip_error", err, 1e-5);
  r.invariant("norm_drift", fwd.norm_drift, 1e-4);
  Outcome o = r.finish();
  if (!out.empty()) o.files.emplace_back(out, io::dump(io::curve_to_json(*model, back.curve)));
  add_csv(o, g, io::curve_csv(*model, back.curve));
  return o;
}

Outcome cmd_cube2(const Globals& g, const std::string& direction, const std::string& in, const std::string& out,
                  const std::string& frame) {
  require_output(out, "cube2");
  const Json doc = io::read_json(in);
  const auto model = io::model_of(doc);
  const TransportOptions t = transport_options(g);
  Report r("cube2", Json{{"direction", direction}, {"input", in}, {"output", out}}, g);
  r.set("comparison_metric", distance_kind(*model));
  Outcome o;
  if (direction == "forward") {
    const CubeSample alpha = io::cube_from_json(doc, *model);
    const CubeLinearization lin = p2_forward(*model, alpha, choose_frame(*model, alpha.base(), frame), t);
    r.metric("grid1_nodes", alpha.grid1.size());
    r.metric("grid2_nodes", alpha.grid2.size());
    o = r.finish();
    o.files.emplace_back(out, io::dump(io::cube_linearization_to_json(*model, lin)));
  } else if (direction == "inverse") {
    const CubeLinearization lin = io::cube_linearization_from_json(doc, *model);
    require_differentiable(lin.v1.grid);
    require_differentiable(lin.grid2);
    const CubeSample alpha = p2_inverse(*model, lin, t);
    r.metric("grid1_nodes", alpha.grid1.size());
    r.metric("grid2_nodes", alpha.grid2.size());
    o = r.finish();
    o.files.emplace_back(out, io::dump(io::cube_to_json(*model, alpha)));
    add_csv(o, g, io::cube_csv(*model, alpha));
  } else {
    throw ValidationError("cube2 direction must be forward or inverse");
  }
  return o;
}

Outcome cmd_polyfit(const Globals& g, const std::string& in, const std::string& out, int degree,
                    const std::string& basis_name) {
  if (degree < 0) throw ValidationError("--degree must be >= 0");
  Basis basis;
  if (basis_name == "bernstein") basis = Basis::bernstein;
  else if (basis_name == "monomial") basis = Basis::monomial;
  else throw ValidationError("--basis must be bernstein or monomial");
  const Json doc = io::read_json(in);
  const auto model = io::model_of(doc);
  const SampledCurve curve = io::curve_from_json(doc, *model);
  if (static_cast<std::size_t>(degree) + 1 > curve.grid.size()) throw ValidationError("degree + 1 exceeds node count");
  require_differentiable(curve.grid);

  const WeierstrassReport w = weierstrass_fit(*model, curve, degree, basis, transport_options(g));
  Report r("polyfit", Json{{"input", in}, {"output", out}, {"degree", degree}, {"basis", basis_name}}, g);
  r.set("comparison_metric", distance_kind(*model));
  r.metric("c0_error", w.c0_error);
  r.metric("c1_error", w.c1_error);
  r.metric("v_residual_l2", w.v_residual_l2);
  r.metric("v_residual_sup", w.v_residual_sup);
  r.metric("covariant_power_residual", w.fit.residual);
  Json coeffs = Json::array();
  for (const auto& c : w.fit.coeffs.coeffs) coeffs.push_back(io::to_json(c));
  r.set("fit", Json{{"basis", basis_name},
                    {"degree", degree},
                    {"interval", {w.fit.coeffs.lo, w.fit.coeffs.hi}},
                    {"frame0", io::to_json(w.fit.frame0.columns)},
                    {"coefficients", coeffs}});
  Outcome o = r.finish();
  if (!out.empty()) o.files.emplace_back(out, io::dump(io::curve_to_json(*model, w.fit.realized)));
  add_csv(o, g, io::curve_csv(*model, w.fit.realized));
  return o;
}

Outcome cmd_flow(const Globals& g, const std::string& in, const std::string& out, const std::string& p_text,
                 const std::string& q_text, double time) {
  require_output(out, "flow");
  const Json doc = io::read_json(in);
  const auto model = io::model_of(doc);
  const std::vector<Point> pts = io::points_from_json(doc, *model);
  const Point p = parse_point(p_text, *model, "--p");
  const Point q = parse_point(q_text, *model, "--q");
  if (!std::isfinite(time)) throw ValidationError("--time must be finite");

  const ExpMap em(*model);
  const CarrierFieldSpec spec = make_carrier_spec(em, p, q);
  std::vector<Point> moved;
  for (const auto& m : pts) moved.push_back(flow(em, spec, m, time));
  Report r("flow", Json{{"input", in}, {"output", out}, {"p", p_text}, {"q", q_text}, {"time", time}}, g);
  r.set("comparison_metric", distance_kind(*model));
  r.metric("r0", spec.r0);
  r.metric("r_in", spec.r_in);
  r.metric("r_out", spec.r_out);
  r.metric("points", pts.size());
  if (time == 1.0) r.invariant("phi_p_to_q", point_distance(*model, phi(em, spec, p), q), 1e-6);
  Outcome o = r.finish();
  o.files.emplace_back(out, io::dump(io::points_to_json(*model, moved)));
  add_csv(o, g, io::points_csv(*model, moved));
  return o;
}

Outcome cmd_trivialize(const Globals& g, const std::string& in, const std::string& out, const std::string& m_text,
                       const std::string& p_text, bool inverse) {
  require_output(out, "trivialize");
  const Json doc = io::read_json(in);
  const auto model = io::model_of(doc);
  const SampledCurve curve = io::curve_from_json(doc, *model);
  const ExpMap em(*model);
  Report r("trivialize", Json{{"input", in}, {"output", out}, {"m", m_text}, {"p", p_text}, {"inverse", inverse}}, g);
  r.set("comparison_metric", distance_kind(*model));
  Outcome o;
  if (!inverse) {
    if (m_text.empty()) throw ValidationError("trivialize needs --m");
    const Point m = parse_point(m_text, *model, "--m");
    const TrivializationChart chart(em, curve.base());
    const SampledCurve sigma = chart.trivialize(m, curve);
    const auto [m2, back] = chart.untrivialize(sigma);
    r.invariant("starts_at_m", point_distance(*model, sigma.base(), m), 1e-6);
    r.invariant("roundtrip_error", max_curve_distance(*model, back, curve), 1e-5);
    o = r.finish();
    o.files.emplace_back(out, io::dump(io::curve_to_json(*model, sigma)));
    add_csv(o, g, io::curve_csv(*model, sigma));
  } else {
    if (p_text.empty()) throw ValidationError("trivialize --inverse needs --p");
    const Point p = parse_point(p_text, *model, "--p");
    const TrivializationChart chart(em, p);
    const auto [m, gamma] = chart.untrivialize(curve);
    r.set("m", io::to_json(m));
    r.invariant("starts_at_p", point_distance(*model, gamma.base(), p), 1e-6);
    o = r.finish();
    o.files.emplace_back(out, io::dump(io::curve_to_json(*model, gamma)));
    add_csv(o, g, io::curve_csv(*model, gamma));
  }
  return o;
}

Outcome cmd_normalize(const Globals& g, const std::string& in, const std::string& out, double epsilon) {
  require_output(out, "normalize");
  const Json doc = io::read_json(in);
  const auto model = io::model_of(doc);
  const SampledCurve curve = io::curve_from_json(doc, *model);
  if (!(epsilon > 0)) throw ValidationError("--epsilon must be positive");
  require_differentiable(curve.grid);

  const SampledCurve a = arclength_normalize(*model, curve, epsilon);
  const CurveTrack t = track_curve(*model, a);
  double dev = 0.0;
  for (std::size_t j = 0; j < a.points.size(); ++j) {
    dev = std::max(dev, std::abs(g_norm(*model, t.node_point(j), t.velocity[j]) - 1.0));
  }
  Report r("normalize", Json{{"input", in}, {"output", out}, {"epsilon", epsilon}}, g);
  r.set("comparison_metric", distance_kind(*model));
  r.metric("length", a.grid.end());
  r.invariant("unit_speed_deviation", dev, 1e-4);
  Outcome o = r.finish();
  o.files.emplace_back(out, io::dump(io::curve_to_json(*model, a)));
  add_csv(o, g, io::curve_csv(*model, a));
  return o;
}

std::string table(const std::vector<suite::Row>& rows) {
  std::string s;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-11s %-40s %12s %3s %10s  %s\n", "model", "module", "invariant", "value",
                "", "tolerance", "result");
  s += line;
  for (const auto& r : rows) {
    char value[32];
    if (std::isfinite(r.value)) std::snprintf(value, sizeof value, "%.4e", r.value);
    else std::snprintf(value, sizeof value, "n/a");
    std::snprintf(line, sizeof line, "%-12s %-11s %-40s %12s %3s %10.1e  %s%s%s\n", r.model.c_str(),
                  r.module.c_str(), r.name.c_str(), value, suite::symbol(r.cmp), r.tolerance,
                  r.pass ? "PASS" : "FAIL", r.note.empty() ? "" : "  # ", r.note.c_str());
    s += line;
  }
  return s;
}

Outcome cmd_check(const Globals& g, const std::string& target, const std::string& out, std::string& printed) {
  std::vector<std::string> models;
  if (target == "all") models = model_names();
  else {
    make_model(target);
    models = {target};
  }
  suite::Options opts;
  opts.transport = transport_options(g);
  std::vector<suite::Row> rows = suite::numerics_checks();
  for (const auto& name : models) {
    const auto m = make_model(name);
    const auto r = suite::run_model(*m, g.seed, opts);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  bool all = true;
  Json inv = Json::array();
  for (const auto& r : rows) {
    all = all && r.pass;
    Json row{{"model", r.model},   {"module", r.module},       {"name", r.name}, {"value", r.value},
             {"relation", suite::symbol(r.cmp)}, {"tolerance", r.tolerance}, {"pass", r.pass}};
    if (!r.note.empty()) row["note"] = r.note;
    inv.push_back(row);
  }
  Json report{{"schema_version", io::kSchemaVersion},
              {"kind", "report"},
              {"command", Json{{"name", "check"}, {"args", Json{{"target", target}, {"seed", g.seed}}}}},
              {"tolerances", Json{{"n_substeps", g.substeps}, {"tolerance_report_only", g.report_only}}},
              {"invariants", inv},
              {"pass", all}};
  printed = table(rows);
  Outcome o{report, {}, !all};
  if (!out.empty()) o.files.emplace_back(out, io::dump(report));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pathlin: path-space linearization on model manifolds"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--n-substeps", g.substeps, "RK4 substeps per grid interval")->check(CLI::PositiveNumber);
  app.add_flag("--tolerance-report-only", g.report_only, "report failed tolerances without a non-zero exit");
  app.add_option("--seed", g.seed, "seed for the invariant suite");
  app.add_option("--csv", g.csv, "also write the primary output as CSV (t, coords..., chart)");

  std::string input, output, frame = "orthonormal", describe, direction, basis = "bernstein", p_text, q_text,
                             m_text, target;
  int degree = 3;
  double time = 1.0, epsilon = 1e-6;
  bool inverse = false;

  auto* models = app.add_subcommand("models", "list models or describe one as JSON");
  models->add_option("--describe", describe, "model name");

  auto* lin = app.add_subcommand("linearize", "curve file -> tangent-curve file");
  lin->add_option("input", input, "curve JSON")->required();
  lin->add_option("-o,--output", output, "tangent-curve JSON");
  lin->add_option("--frame", frame, "orthonormal | coordinate");

  auto* syn = app.add_subcommand("synthesize", "tangent-curve file -> curve file");
  syn->add_option("input", input, "tangent-curve JSON")->required();
  syn->add_option("-o,--output", output, "curve JSON");

  auto* rt = app.add_subcommand("roundtrip", "p_inverse(p_forward(curve)) vs curve");
  rt->add_option("input", input, "curve JSON")->required();
  rt->add_option("-o,--output", output, "reconstructed curve JSON");

  auto* cube = app.add_subcommand("cube2", "two-parameter maps: forward | inverse");
  cube->add_option("direction", direction, "forward | inverse")->required();
  cube->add_option("input", input, "cube or cube_linearization JSON")->required();
  cube->add_option("-o,--output", output, "output JSON");
  cube->add_option("--frame", frame, "orthonormal | coordinate (forward)");

  auto* pf = app.add_subcommand("polyfit", "polynomial-like approximation of a curve");
  pf->add_option("input", input, "curve JSON")->required();
  pf->add_option("-o,--output", output, "realized curve JSON");
  pf->add_option("--degree", degree, "polynomial degree");
  pf->add_option("--basis", basis, "bernstein | monomial");

  auto* fl = app.add_subcommand("flow", "carrier-field flow of a point list");
  fl->add_option("input", input, "points JSON")->required();
  fl->add_option("-o,--output", output, "points JSON");
  fl->add_option("--p", p_text, "base point, x,y or chart:x,y")->required();
  fl->add_option("--q", q_text, "target point, x,y or chart:x,y")->required();
  fl->add_option("--time", time, "flow time (1 = phi)");

  auto* tv = app.add_subcommand("trivialize", "evaluation-bundle trivialization of a based curve");
  tv->add_option("input", input, "curve JSON")->required();
  tv->add_option("-o,--output", output, "curve JSON");
  tv->add_option("--m", m_text, "new basepoint, x,y or chart:x,y");
  tv->add_flag("--inverse", inverse, "untrivialize: move the curve back to --p");
  tv->add_option("--p", p_text, "chart base point for --inverse");

  auto* nm = app.add_subcommand("normalize", "unit-speed reparametrization");
  nm->add_option("input", input, "curve JSON")->required();
  nm->add_option("-o,--output", output, "curve JSON");
  nm->add_option("--epsilon", epsilon, "immersion floor");

  auto* ck = app.add_subcommand("check", "run the invariant suite");
  ck->add_option("target", target, "model name or all")->required();
  ck->add_option("-o,--output", output, "JSON report file");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Outcome o;
    std::string printed;
    if (*models) {
      o = cmd_models(describe);
    } else if (*lin) {
      o = cmd_linearize(g, input, output, frame);
    } else if (*syn) {
      o = cmd_synthesize(g, input, output);
    } else if (*rt) {
      o = cmd_roundtrip(g, input, output);
    } else if (*cube) {
      o = cmd_cube2(g, direction, input, output, frame);
    } else if (*pf) {
      o = cmd_polyfit(g, input, output, degree, basis);
    } else if (*fl) {
      o = cmd_flow(g, input, output, p_text, q_text, time);
    } else if (*tv) {
      o = cmd_trivialize(g, input, output, m_text, p_text, inverse);
    } else if (*nm) {
      o = cmd_normalize(g, input, output, epsilon);
    } else if (*ck) {
      if (!g.csv.empty()) throw ValidationError("--csv is not available for check");
      o = cmd_check(g, target, output, printed);
    }
    for (const auto& [path, text] : o.files) io::write_text(path, text);
    if (!printed.empty()) std::cout << printed;
    else std::cout << io::dump(o.report);
    if (o.failed && !g.report_only) {
      std::cerr << "pathlin: tolerance check failed\n";
      return 3;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "pathlin: " << e.what() << "\n";
    return e.is_validation() ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "pathlin: " << e.what() << "\n";
    return 3;
  }
}
