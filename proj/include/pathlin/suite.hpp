#pragma once

// Invariant suite behind `pathlin check`. Every check draws from its own
// seeded stream, so rows are reproducible one by one and the whole report is
// byte-identical for a fixed seed.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "pathlin/bundleflow.hpp"
#include "pathlin/cubemaps.hpp"
#include "pathlin/linearize.hpp"
#include "pathlin/models.hpp"
#include "pathlin/polycurves.hpp"
#include "pathlin/samples.hpp"

namespace pathlin::suite {

enum class Cmp { below, at_most, at_least };

inline const char* symbol(Cmp c) {
  switch (c) {
    case Cmp::below: return "<";
    case Cmp::at_most: return "<=";
    case Cmp::at_least: return ">=";
  }
  return "?";
}

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

struct Row {
  std::string model;
  std::string module;
  std::string name;
  double value = 0.0;
  Cmp cmp = Cmp::below;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

inline Row make_row(std::string model, std::string module, std::string name, double value, Cmp cmp, double tol,
                    std::string note = {}) {
  bool pass = false;
  if (std::isfinite(value)) {
    switch (cmp) {
      case Cmp::below: pass = value < tol; break;
      case Cmp::at_most: pass = value <= tol; break;
      case Cmp::at_least: pass = value >= tol; break;
    }
  }
  return Row{std::move(model), std::move(module), std::move(name), value, cmp, tol, pass, std::move(note)};
}

/// Errors at or below this are roundoff; refinement ratios are meaningless there.
inline constexpr double kRoundoffFloor = 1e-12;

/// Observed order log2(coarse/fine) with the roundoff floor applied: a fine
/// error already at the floor counts as converged.
inline Row order_row(std::string model, std::string module, std::string name, double coarse, double fine,
                     double min_order) {
  double order = std::log2(coarse / fine);
  if (!std::isfinite(order)) order = std::numeric_limits<double>::quiet_NaN();
  if (fine <= kRoundoffFloor) {
    Row r = make_row(model, module, name, order, Cmp::at_least, min_order, "fine-grid error at roundoff floor");
    r.pass = true;
    return r;
  }
  return make_row(std::move(model), std::move(module), std::move(name), order, Cmp::at_least, min_order);
}

// splitmix64 finalizer; mixes seed, model and check into one stream seed.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline Rng stream(std::uint64_t seed, const std::string& model, const std::string& check) {
  std::uint64_t h = mix(seed);
  for (char c : model + "/" + check) h = mix(h ^ static_cast<unsigned char>(c));
  return Rng(h);
}

struct Options {
  TransportOptions transport;
};

// ---------------------------------------------------------------------------
// numerics (model independent)

inline std::vector<Row> numerics_checks() {
  std::vector<Row> rows;
  const std::string m = "-";
  // Rotation flow, error after one period.
  auto rotation_error = [](std::size_t n) {
    const Grid g = Grid::uniform(0.0, 2.0 * std::numbers::pi, n);
    Vec y0(2);
    y0 << 1.0, 0.0;
    auto f = [](double, const Vec& y) {
      Vec d(2);
      d << -y(1), y(0);
      return d;
    };
    const Trajectory tr = integrate(f, y0, g, 1);
    return (tr.states.back() - y0).norm();
  };
  const double e1 = rotation_error(50), e2 = rotation_error(100);
  rows.push_back(order_row(m, "numerics", "rk4_observed_order", e1, e2, 3.8));

  {
    const Grid g = Grid::uniform(0.0, 1.0, 200);
    std::vector<Vec> f;
    for (double t : g.nodes()) f.push_back(Vec::Constant(1, std::sin(t)));
    const auto back = differentiate(cumulative_trapezoid(f, g), g);
    double worst = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) worst = std::max(worst, std::abs(back[j](0) - f[j](0)));
    rows.push_back(make_row(m, "numerics", "differentiate_cumtrapz_sin", worst, Cmp::below, 1e-5));
  }

  {
    const Grid g = Grid::uniform(0.0, 1.0, 200);
    std::vector<Vec> f;
    for (double t : g.nodes()) f.push_back(Vec::Constant(1, std::abs(t - 0.5)));
    double prev = std::numeric_limits<double>::infinity();
    double worst_increase = 0.0;
    for (int d = 0; d <= 12; ++d) {
      const double r = weighted_l2_distance(eval_poly(fit_poly(f, g, d), g), f, g);
      worst_increase = std::max(worst_increase, r - prev);
      prev = r;
    }
    rows.push_back(make_row(m, "numerics", "fit_residual_monotone", worst_increase, Cmp::at_most, 1e-12));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// geometry

inline Vec random_unit(const ManifoldModel& model, const Point& p, Rng& rng) {
  const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const Vec u = orthonormal_frame(model, p).columns * detail::vec2(std::cos(a), std::sin(a));
  return u;
}

inline std::vector<Row> geometry_checks(const ManifoldModel& model, std::uint64_t seed) {
  std::vector<Row> rows;
  const std::string name = model.name();
  const auto nc = static_cast<ChartId>(model.charts().size());

  Rng rng = stream(seed, name, "geometry");
  double compat = 0.0, trans = 0.0, push = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Point p = random_point(model, rng);
    const Vec u = random_unit(model, p, rng);
    for (ChartId c = 0; c < nc; ++c) {
      const Vec x = model.change_coords(p.chart, c, p.coords);
      if (!x.allFinite() || model.domain_test(c, x) == Domain::outside) continue;
      compat = std::max(compat, metric_compatibility_residual(model, c, x));
      const Point back = transition(model, transition(model, p, c), p.chart);
      trans = std::max(trans, (back.coords - p.coords).norm() / std::max(1.0, p.coords.norm()));
      push = std::max(push, std::abs(g_norm(model, push_tangent(model, Tangent{p, u}, c)) - 1.0));
    }
  }
  rows.push_back(make_row(name, "geometry", "metric_compatibility", compat, Cmp::below, 1e-6));
  rows.push_back(make_row(name, "geometry", "transition_roundtrip", trans, Cmp::below, 1e-12, "relative to max(1,|x|)"));
  rows.push_back(make_row(name, "geometry", "push_tangent_norm", push, Cmp::below, 1e-10));

  if (model.has_oracle()) {
    Rng r2 = stream(seed, name, "oracle");
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Point p = random_point(model, r2);
      const double len = r2.uniform(0.0, 0.95) * std::min(model.r0(p), 3.0);
      const Vec v = len * random_unit(model, p, r2);
      const Point q = model.oracle_exp(p, v);
      const Vec back = log_oracle(model, p, q).components;
      worst = std::max(worst, g_norm(model, p, back - v));
      worst = std::max(worst, model.oracle_dist(model.oracle_exp(p, back), q));
    }
    rows.push_back(make_row(name, "geometry", "exp_log_inverse", worst, Cmp::below, 1e-10));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// transport

/// Max deviation of a transported frame from the oracle parallel frame along
/// the unit-speed great circle from the north pole, t in [0, 2].
inline double great_circle_transport_error(const ManifoldModel& sphere, std::size_t n, const TransportOptions& opts) {
  const SampledCurve c = sphere_great_circle(1.0, n, 0.0, 2.0);
  const Point p = c.points.front();
  const UnitSphere& s = dynamic_cast<const UnitSphere&>(sphere);
  Frame f0{p, Mat(2, 2)};
  f0.columns.col(0) = s.unembed_tangent(p, Eigen::Vector3d(1, 0, 0));
  f0.columns.col(1) = s.unembed_tangent(p, Eigen::Vector3d(0, 1, 0));
  const FrameField ff = transport_frame(sphere, c, f0, opts);
  double worst = 0.0;
  for (std::size_t j = 0; j < c.points.size(); ++j) {
    const Frame& f = ff.frames[j];
    const double t = c.grid[j];
    const Eigen::Vector3d e1 = UnitSphere::embed_tangent(f.base, f.columns.col(0));
    const Eigen::Vector3d e2 = UnitSphere::embed_tangent(f.base, f.columns.col(1));
    worst = std::max(worst, (e1 - Eigen::Vector3d(std::cos(t), 0, -std::sin(t))).norm());
    worst = std::max(worst, (e2 - Eigen::Vector3d(0, 1, 0)).norm());
  }
  return worst;
}

inline std::vector<Row> transport_checks(const ManifoldModel& model, std::uint64_t seed, const Options& o) {
  std::vector<Row> rows;
  const std::string name = model.name();
  Rng rng = stream(seed, name, "transport");
  double drift = 0.0, inversion = 0.0;
  for (int k = 0; k < 50; ++k) {
    const RandomCurve rc = random_smooth_curve(model, rng, 400);
    const CurveTrack track = track_curve(model, rc.curve);
    const Frame f0 = orthonormal_frame(model, rc.curve.base());
    const FrameField ff = transport_frame(model, rc.curve, track, f0, o.transport);
    for (const Frame& f : ff.frames) {
      for (Eigen::Index i = 0; i < f.columns.cols(); ++i) {
        drift = std::max(drift, std::abs(g_norm(model, f.base, f.columns.col(i)) - 1.0));
      }
    }
    if (k < 10) {
      const Tangent v{f0.base, f0.columns.col(0)};
      const Tangent there = transport_vector(model, rc.curve, track, v, 0.0, 1.0, o.transport);
      const Tangent back = transport_vector(model, rc.curve, track, there, 1.0, 0.0, o.transport);
      const Vec d = push_tangent(model, back, v.base.chart).components - v.components;
      inversion = std::max(inversion, g_norm(model, v.base, d));
    }
  }
  rows.push_back(make_row(name, "transport", "norm_preservation", drift, Cmp::below, 1e-5));
  rows.push_back(make_row(name, "transport", "inversion", inversion, Cmp::below, 1e-5));

  if (name == "sphere2") {
    const double e1 = great_circle_transport_error(model, 16, o.transport);
    const double e2 = great_circle_transport_error(model, 32, o.transport);
    rows.push_back(order_row(name, "transport", "great_circle_refinement_order", e1, e2, 3.5));

    // Same curve written in the north and in the south chart.
    Rng r2 = stream(seed, name, "chart_independence");
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const SampledCurve c = wiggly_sphere_curve(r2, 400);
      SampledCurve north = c, south = c;
      for (auto& p : north.points) p = transition(model, p, UnitSphere::kNorth);
      for (auto& p : south.points) p = transition(model, p, UnitSphere::kSouth);
      const Frame fn = orthonormal_frame(model, north.base());
      const Frame fs = push_frame(model, fn, UnitSphere::kSouth);
      const FrameField a = transport_frame(model, north, fn, o.transport);
      const FrameField b = transport_frame(model, south, fs, o.transport);
      for (std::size_t j = 0; j < c.points.size(); ++j) {
        const Frame fb = push_frame(model, b.frames[j], a.frames[j].base.chart);
        worst = std::max(worst, (fb.columns - a.frames[j].columns).norm());
      }
    }
    rows.push_back(make_row(name, "transport", "chart_independence", worst, Cmp::below, 1e-6));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// linearize

struct RoundtripSweep {
  double max_error_n = 0.0;
  double max_error_2n = 0.0;
  double max_drift = 0.0;
};

/// Roundtrip on `count` seeded curves at N and 2N (each synthesized at its own resolution).
inline RoundtripSweep roundtrip_sweep(const ManifoldModel& model, Rng& rng, int count, std::size_t n,
                                      const TransportOptions& opts) {
  RoundtripSweep s;
  for (int k = 0; k < count; ++k) {
    const Point base = random_point(model, rng);
    const PolyCoeffs poly = random_poly(model.dim(), 3, comfortable_speed(model), rng);
    const Frame f0 = orthonormal_frame(model, base);
    for (std::size_t nn : {n, 2 * n}) {
      const SampledCurve c = synthesize_curve(model, base, f0, poly, Grid::uniform(0.0, 1.0, nn));
      const RoundtripReport r = roundtrip_check(model, c, opts);
      (nn == n ? s.max_error_n : s.max_error_2n) = std::max(nn == n ? s.max_error_n : s.max_error_2n, r.max_distance);
      if (nn == n) s.max_drift = std::max(s.max_drift, r.forward.norm_drift);
    }
  }
  return s;
}

inline std::vector<Row> linearize_checks(const ManifoldModel& model, std::uint64_t seed, const Options& o) {
  std::vector<Row> rows;
  const std::string name = model.name();
  Rng rng = stream(seed, name, "roundtrip");
  const RoundtripSweep s = roundtrip_sweep(model, rng, 30, 400, o.transport);
  rows.push_back(make_row(name, "linearize", "roundtrip_N400", s.max_error_n, Cmp::below, 1e-5));
  rows.push_back(order_row(name, "linearize", "roundtrip_order", s.max_error_n, s.max_error_2n, 3.0));
  rows.push_back(make_row(name, "linearize", "norm_correspondence", s.max_drift, Cmp::below, 1e-5));

  Rng r2 = stream(seed, name, "forward_of_inverse");
  double comp_err = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Point base = random_point(model, r2);
    const PolyCoeffs poly = random_poly(model.dim(), 3, comfortable_speed(model), r2);
    const TangentCurve v = tangent_curve_from_poly(model, base, orthonormal_frame(model, base), poly,
                                                   Grid::uniform(0.0, 1.0, 400));
    TangentCurve vv = v;
    vv.order = 8;
    const InverseResult inv = p_inverse(model, vv, o.transport);
    const TangentCurve back = p_forward(model, inv.curve, v.frame0, o.transport).tangent_curve;
    for (std::size_t j = 0; j < v.components.size(); ++j) {
      comp_err = std::max(comp_err, (back.components[j] - v.components[j]).norm());
    }
  }
  rows.push_back(make_row(name, "linearize", "forward_of_inverse", comp_err, Cmp::below, 1e-5));

  Rng r3 = stream(seed, name, "equivariance");
  double equi = 0.0;
  for (int k = 0; k < 5; ++k) {
    const RandomCurve rc = random_smooth_curve(model, r3, 200);
    Mat a(2, 2);
    a << r3.uniform(0.5, 1.5), r3.uniform(-0.5, 0.5), r3.uniform(-0.5, 0.5), r3.uniform(0.5, 1.5);
    const Frame f0 = orthonormal_frame(model, rc.curve.base());
    const Frame fa{f0.base, f0.columns * a};
    const CurveTrack track = track_curve(model, rc.curve);
    const auto v0 = p_forward(model, rc.curve, track, f0, o.transport).tangent_curve.components;
    const auto va = p_forward(model, rc.curve, track, fa, o.transport).tangent_curve.components;
    const Eigen::PartialPivLU<Mat> lu(a);
    for (std::size_t j = 0; j < v0.size(); ++j) {
      const Vec expect = lu.solve(v0[j]);
      equi = std::max(equi, (va[j] - expect).norm() / std::max(1.0, expect.norm()));
    }
  }
  rows.push_back(make_row(name, "linearize", "frame_equivariance", equi, Cmp::below, 1e-9));
  return rows;
}

// ---------------------------------------------------------------------------
// cubemaps

/// Seeded (v1, v2) with low-degree polynomial components on [-1,1]^2.
inline CubeLinearization random_cube_linearization(const ManifoldModel& model, Rng& rng, std::size_t n) {
  const Point p = random_point(model, rng);
  const double sp = 0.5 * comfortable_speed(model);
  const Grid g = Grid::uniform(-1.0, 1.0, n);
  CubeLinearization lin;
  lin.base = p;
  lin.frame0 = orthonormal_frame(model, p);
  lin.v1 = tangent_curve_from_poly(model, p, lin.frame0, random_poly(2, 2, sp, rng, -1, 1), g, n / 2);
  lin.v1.order = 4;
  lin.grid2 = g;
  lin.base2 = n / 2;
  const PolyCoeffs a = random_poly(2, 2, sp, rng, -1, 1);
  const PolyCoeffs b = random_poly(2, 1, sp, rng, -1, 1);
  lin.v2.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) lin.v2[i].push_back(eval_poly(a, g[j]) + g[i] * eval_poly(b, g[j]));
  }
  return lin;
}

struct CubeRoundtrip {
  double forward_of_inverse = 0.0;  // lin -> alpha -> lin'
  double inverse_of_forward = 0.0;  // alpha -> lin' -> alpha'
};

inline CubeRoundtrip cube_roundtrip(const ManifoldModel& model, const CubeLinearization& lin,
                                    const TransportOptions& opts) {
  const CubeSample alpha = p2_inverse(model, lin, opts);
  const CubeLinearization lin2 = p2_forward(model, alpha, lin.frame0, opts);
  const CubeSample alpha2 = p2_inverse(model, lin2, opts);
  return CubeRoundtrip{max_linearization_difference(lin, lin2), max_cube_distance(model, alpha, alpha2)};
}

inline std::vector<Row> cubemaps_checks(const ManifoldModel& model, std::uint64_t seed, const Options& o) {
  std::vector<Row> rows;
  const std::string name = model.name();
  Rng rng = stream(seed, name, "cube");
  const CubeLinearization lin = random_cube_linearization(model, rng, 200);
  const CubeRoundtrip rt = cube_roundtrip(model, lin, o.transport);
  rows.push_back(make_row(name, "cubemaps", "roundtrip_forward_of_inverse", rt.forward_of_inverse, Cmp::below, 1e-4));
  rows.push_back(make_row(name, "cubemaps", "roundtrip_inverse_of_forward", rt.inverse_of_forward, Cmp::below, 1e-4));

  // Restriction: v1 is p_forward of the s2 = 0 line; v2 on that line is the
  // s2-velocity transported to p.
  const CubeSample alpha = p2_inverse(model, lin, o.transport);
  const CubeLinearization f = p2_forward(model, alpha, lin.frame0, o.transport);
  const SampledCurve line = alpha.line1(alpha.base2);
  const auto v1 = p_forward(model, line, lin.frame0, o.transport).tangent_curve.components;
  double v1_diff = 0.0, v2_diff = 0.0;
  const CurveTrack track = track_curve(model, line);
  const Frame f0 = push_frame(model, lin.frame0, track.node_chart[line.base_index]);
  const Eigen::PartialPivLU<Mat> lu(f0.columns);
  for (std::size_t i = 0; i < v1.size(); ++i) {
    v1_diff = std::max(v1_diff, (v1[i] - f.v1.components[i]).norm());
    if (i % 20 != 0) continue;
    const Tangent d2 = track_curve(model, alpha.line2(i)).node_velocity(alpha.base2);
    const Tangent at_p = transport_vector(model, line, track, d2, alpha.grid1[i], alpha.grid1[alpha.base1], o.transport);
    v2_diff = std::max(v2_diff, (lu.solve(push_tangent(model, at_p, f0.base.chart).components) - f.v2[i][alpha.base2]).norm());
  }
  rows.push_back(make_row(name, "cubemaps", "restriction_v1_exact", v1_diff, Cmp::at_most, 0.0));
  rows.push_back(make_row(name, "cubemaps", "restriction_v2_base_line", v2_diff, Cmp::below, 1e-6));

  CubeSample flat;
  flat.grid1 = flat.grid2 = Grid::uniform(-1.0, 1.0, 20);
  flat.base1 = flat.base2 = 10;
  flat.points.assign(21, std::vector<Point>(21, lin.base));
  const CubeLinearization z = p2_forward(model, flat, lin.frame0, o.transport);
  double zmax = 0.0;
  for (std::size_t i = 0; i < 21; ++i) {
    zmax = std::max(zmax, z.v1.components[i].norm());
    for (const auto& c : z.v2[i]) zmax = std::max(zmax, c.norm());
  }
  rows.push_back(make_row(name, "cubemaps", "degenerate_cube_zero", zmax, Cmp::below, 1e-10));
  return rows;
}

// ---------------------------------------------------------------------------
// polycurves

inline std::vector<Row> polycurves_checks(const ManifoldModel& model, std::uint64_t seed, const Options& o) {
  std::vector<Row> rows;
  const std::string name = model.name();
  Rng rng = stream(seed, name, "polylike");
  double resid = 0.0, witness = std::numeric_limits<double>::infinity();
  for (int d = 0; d <= 3; ++d) {
    const Point p = random_point(model, rng);
    PolyCoeffs c = random_poly(2, d, 0.5 * comfortable_speed(model), rng);
    const PolyLikeCurve pl = make_polynomial_like(model, p, orthonormal_frame(model, p), c,
                                                  Grid::uniform(0.0, 1.0, 400), 0, o.transport);
    // d = 3 would nest five differences at h = 1/400; roundoff alone reaches 1e-2 there.
    if (d <= 2) resid = std::max(resid, pl.residual);
    if (d >= 1) {
      // |nabla^(d) gamma'|_g = d! |a_d| for the orthonormal frame0.
      const double lead = c.coeffs.back().norm();
      const double nd = covariant_power_residual(model, pl.realized, d);
      witness = std::min(witness, nd / lead);
    }
  }
  rows.push_back(make_row(name, "polycurves", "polylike_residual", resid, Cmp::below, 1e-4, "degrees 0..2"));
  rows.push_back(make_row(name, "polycurves", "polylike_nonvanishing_ratio", witness, Cmp::at_least, 0.1,
                          "min |nabla^(d)|/|leading coeff|"));

  Rng r2 = stream(seed, name, "conjugation");
  const Point base = random_point(model, r2);
  const PolyCoeffs poly = random_poly(2, 3, comfortable_speed(model), r2);
  const Frame f0 = orthonormal_frame(model, base);
  const double c200 = conjugation_residual(
      model, synthesize_curve(model, base, f0, poly, Grid::uniform(0.0, 1.0, 200)), f0, o.transport);
  const double c400 = conjugation_residual(
      model, synthesize_curve(model, base, f0, poly, Grid::uniform(0.0, 1.0, 400)), f0, o.transport);
  rows.push_back(make_row(name, "polycurves", "conjugation_N400", c400, Cmp::below, 1e-4));
  rows.push_back(order_row(name, "polycurves", "conjugation_order", c200, c400, 2.0));

  Rng r3 = stream(seed, name, "weierstrass");
  const SampledCurve target = name == "sphere2" ? wiggly_sphere_curve(r3, 400) : random_smooth_curve(model, r3, 400).curve;
  double prev = std::numeric_limits<double>::infinity(), increase = -std::numeric_limits<double>::infinity();
  double c0_3 = 0.0, c0_10 = 0.0;
  for (int d = 0; d <= 10; ++d) {
    const WeierstrassReport w = weierstrass_fit(model, target, d, Basis::bernstein, o.transport);
    increase = std::max(increase, w.v_residual_l2 - prev);
    prev = w.v_residual_l2;
    if (d == 3) c0_3 = w.c0_error;
    if (d == 10) c0_10 = w.c0_error;
  }
  rows.push_back(make_row(name, "polycurves", "weierstrass_v_residual_monotone", increase, Cmp::at_most, 1e-12));
  rows.push_back(make_row(name, "polycurves", "weierstrass_c0_deg10_minus_deg3", c0_10 - c0_3,
                          name == "sphere2" ? Cmp::below : Cmp::at_most, name == "sphere2" ? 0.0 : 1e-9,
                          "c0(3)=" + sci(c0_3) + " c0(10)=" + sci(c0_10)));
  return rows;
}

// ---------------------------------------------------------------------------
// bundleflow

inline std::vector<Row> bundleflow_checks(const ManifoldModel& model, std::uint64_t seed, const Options& o) {
  std::vector<Row> rows;
  const std::string name = model.name();
  const ExpMap em(model);

  Rng rng = stream(seed, name, "phi");
  double phi_err = 0.0, group = 0.0, inverse = 0.0;
  bool support_exact = true;
  for (int k = 0; k < 50; ++k) {
    const Point p = random_point(model, rng);
    const double r0 = model.r0(p);
    const Point q = model.oracle_exp(p, rng.uniform(0.0, 0.49) * r0 * random_unit(model, p, rng));
    const CarrierFieldSpec spec = make_carrier_spec(em, p, q);
    phi_err = std::max(phi_err, point_distance(model, phi(em, spec, p), q));
    if (k < 10) {
      const Point m = model.oracle_exp(p, rng.uniform(0.0, 0.6) * r0 * random_unit(model, p, rng));
      const double s = rng.uniform(-1.0, 1.0), t = rng.uniform(-1.0, 1.0);
      const Point a = flow(em, spec, flow(em, spec, m, s), t);
      const Point b = flow(em, spec, m, s + t);
      group = std::max(group, point_distance(model, a, b));
      inverse = std::max(inverse, point_distance(model, flow(em, spec, flow(em, spec, m, 1.0), -1.0), m));
      // Well outside the outer radius.
      const Point far = model.oracle_exp(p, rng.uniform(0.67, 0.99) * r0 * random_unit(model, p, rng));
      if (em.dist(p, far) >= spec.r_out) {
        const Tangent y = carrier_field(em, spec, far);
        support_exact = support_exact && (y.components.array() == 0.0).all();
      }
    }
  }
  rows.push_back(make_row(name, "bundleflow", "phi_p_equals_q", phi_err, Cmp::below, 1e-6));
  rows.push_back(make_row(name, "bundleflow", "flow_group_law", group, Cmp::below, 1e-5));
  rows.push_back(make_row(name, "bundleflow", "flow_inverse", inverse, Cmp::below, 1e-6));
  rows.push_back(make_row(name, "bundleflow", "support_exact_zero", support_exact ? 0.0 : 1.0, Cmp::at_most, 0.0));

  Rng r2 = stream(seed, name, "trivialize");
  {
    const RandomCurve rc = random_smooth_curve(model, r2, 400);
    const Point p = rc.curve.base();
    const double dm = name == "sphere2" ? 0.3 : 0.3 * std::min(1.0, model.r0(p));
    const Point m = model.oracle_exp(p, dm * random_unit(model, p, r2));
    const TrivializationChart chart(em, p);
    const SampledCurve sigma = chart.trivialize(m, rc.curve);
    const auto [m2, back] = chart.untrivialize(sigma);
    rows.push_back(make_row(name, "bundleflow", "trivialize_roundtrip", max_curve_distance(model, back, rc.curve),
                            Cmp::below, 1e-5));
    rows.push_back(make_row(name, "bundleflow", "trivialize_starts_at_m", point_distance(model, sigma.base(), m),
                            Cmp::below, 1e-6));
  }

  Rng r3 = stream(seed, name, "mapping_chart");
  {
    const RandomCurve rc = random_smooth_curve(model, r3, 200);
    const SampledCurve& g1 = rc.curve;
    const double scale = 0.2 * std::min(1.0, model.r0(g1.base()));
    std::vector<Tangent> beta;
    for (const Point& x : g1.points) beta.push_back(Tangent{x, scale * random_unit(model, x, r3)});
    // Nearby second reference curve.
    const Vec w = scale * random_unit(model, g1.base(), r3);
    SampledCurve g2 = g1;
    for (auto& x : g2.points) x = model.oracle_exp(x, push_tangent(model, Tangent{g1.base(), w}, x.chart).components);

    const SampledCurve f = mapping_chart_out(em, g1, beta);
    const auto beta_back = mapping_chart_in(em, g1, f);
    double inv = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) {
      const Vec d = push_tangent(model, beta_back[j], beta[j].base.chart).components - beta[j].components;
      inv = std::max(inv, g_norm(model, beta[j].base, d));
    }
    inv = std::max(inv, max_curve_distance(model, mapping_chart_out(em, g1, beta_back), f));
    rows.push_back(make_row(name, "bundleflow", "mapping_chart_inverse", inv, Cmp::below, 1e-8));

    const auto beta2 = mapping_chart_in(em, g2, f);
    const SampledCurve f2 = mapping_chart_out(em, g2, beta2);
    const auto beta1 = mapping_chart_in(em, g1, f2);
    double tr = max_curve_distance(model, f2, f);
    for (std::size_t j = 0; j < beta.size(); ++j) {
      const Vec d = push_tangent(model, beta1[j], beta[j].base.chart).components - beta[j].components;
      tr = std::max(tr, g_norm(model, beta[j].base, d));
    }
    rows.push_back(make_row(name, "bundleflow", "mapping_chart_transition", tr, Cmp::below, 1e-7));
  }

  Rng r4 = stream(seed, name, "arclength");
  {
    double speed = 0.0, idem = 0.0;
    for (int k = 0; k < 5; ++k) {
      const RandomCurve rc = random_immersed_curve(model, r4, 400);
      const SampledCurve a = arclength_normalize(model, rc.curve, 1e-3);
      const CurveTrack t = track_curve(model, a);
      for (std::size_t j = 0; j < a.points.size(); ++j) {
        speed = std::max(speed, std::abs(g_norm(model, t.node_point(j), t.velocity[j]) - 1.0));
      }
      idem = std::max(idem, max_curve_distance(model, arclength_normalize(model, a, 1e-3), a));
    }
    rows.push_back(make_row(name, "bundleflow", "arclength_unit_speed", speed, Cmp::below, 1e-4));
    rows.push_back(make_row(name, "bundleflow", "arclength_idempotent", idem, Cmp::below, 1e-5));
    if (name == "sphere2") {
      const SampledCurve a = arclength_normalize(model, sphere_great_circle(3.0, 400), 1e-3);
      const TangentCurve v = p_forward(model, a, o.transport).tangent_curve;
      double dev = 0.0;
      for (const Vec& c : v.components) dev = std::max(dev, (c - v.components.front()).norm());
      dev = std::max(dev, std::abs(v.components.front().norm() - 1.0));
      rows.push_back(make_row(name, "bundleflow", "normalized_great_circle_linearization", dev, Cmp::below, 1e-5));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------

inline std::vector<Row> run_model(const ManifoldModel& model, std::uint64_t seed, const Options& o = {}) {
  std::vector<Row> rows;
  auto add = [&](std::vector<Row> r) { rows.insert(rows.end(), r.begin(), r.end()); };
  add(geometry_checks(model, seed));
  add(transport_checks(model, seed, o));
  add(linearize_checks(model, seed, o));
  add(cubemaps_checks(model, seed, o));
  add(polycurves_checks(model, seed, o));
  add(bundleflow_checks(model, seed, o));
  return rows;
}

}  // namespace pathlin::suite
