#pragma once

// The linearization pair.
//
//   p_forward:  gamma  ->  v(t) = P^{t->0}_gamma (gamma'(t)), in frame0 components.
//   p_inverse:  v      ->  gamma solving  gamma' = v^i e_i(t),  nabla_gamma' e_i = 0,
//               an ODE in the m + m^2 unknowns (x^k, e_i^l).

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pathlin/geometry.hpp"
#include "pathlin/numerics.hpp"
#include "pathlin/transport.hpp"

namespace pathlin {

/// v(t) = v^i(t) e_i with {e_i} = frame0 at the basepoint.
struct TangentCurve {
  Point base;
  Frame frame0;
  Grid grid;
  std::vector<Vec> components;
  std::size_t base_index = 0;
  /// Regularity of v; a C^k curve linearizes to C^{k-1}.
  int order = 2;
};

struct LinearizationReport {
  TangentCurve tangent_curve;
  std::vector<ChartSwitch> switch_log;
  /// max_j | |v(t_j)| - |gamma'(t_j)|_g |
  double norm_drift = 0.0;
  double h = 0.0;
  /// Parallel frame along the input curve (frame0 transported).
  FrameField frames;
};

struct InverseResult {
  SampledCurve curve;
  FrameField frames;
};

struct RoundtripReport {
  double max_distance = 0.0;
  std::string metric;
  LinearizationReport forward;
};

inline void require_same_point(const ManifoldModel& model, const Point& a, const Point& b, const char* what) {
  double d;
  try {
    d = (transition(model, a, b.chart).coords - b.coords).norm();
  } catch (const NoOverlap&) {
    throw ValidationError(std::string(what) + " is not at the curve's basepoint");
  }
  if (!(d <= 1e-9 * std::max(1.0, b.coords.norm()))) {
    throw ValidationError(std::string(what) + " is not at the curve's basepoint");
  }
}

inline void validate_tangent_curve(const ManifoldModel& model, const TangentCurve& v) {
  if (v.components.size() != v.grid.size()) {
    throw ValidationError("tangent curve has " + std::to_string(v.components.size()) +
                          " component tuples but the grid has " + std::to_string(v.grid.size()) + " nodes");
  }
  if (v.base_index >= v.grid.size()) throw ValidationError("base_index out of range");
  const auto m = static_cast<Eigen::Index>(model.dim());
  if (v.base.coords.size() != m || v.frame0.columns.rows() != m || v.frame0.columns.cols() != m) {
    throw ValidationError("tangent curve dimensions do not match the manifold");
  }
  if (model.domain_test(v.base.chart, v.base.coords) == Domain::outside) {
    throw ValidationError("tangent curve base lies outside its chart");
  }
  if (!frame_is_valid(v.frame0)) throw ValidationError("frame0 columns are not independent");
  require_same_point(model, v.frame0.base, v.base, "frame0");
  for (std::size_t j = 0; j < v.components.size(); ++j) {
    if (v.components[j].size() != m || !v.components[j].allFinite()) {
      throw ValidationError("tangent curve component " + std::to_string(j) + " is malformed");
    }
  }
}

inline LinearizationReport p_forward(const ManifoldModel& model, const SampledCurve& curve, const CurveTrack& track,
                                     const Frame& frame0, const TransportOptions& opts = {}) {
  require_same_point(model, frame0.base, curve.base(), "frame0");
  if (!frame_is_valid(frame0)) throw ValidationError("frame0 columns are not independent");
  LinearizationReport rep;
  rep.frames = transport_frame(model, curve, track, frame0, opts);
  rep.switch_log = rep.frames.switch_log;
  rep.h = curve.grid.step();

  const Mat gram0 = frame_gram(model, frame0);
  TangentCurve& v = rep.tangent_curve;
  v.base = curve.base();
  v.frame0 = frame0;
  v.grid = curve.grid;
  v.base_index = curve.base_index;
  v.order = std::max(0, curve.order - 1);
  v.components.reserve(curve.points.size());
  for (std::size_t j = 0; j < curve.points.size(); ++j) {
    const Frame& f = rep.frames.frames[j];
    Vec comp = f.columns.partialPivLu().solve(track.velocity[j]);
    const double speed = g_norm(model, track.node_point(j), track.velocity[j]);
    rep.norm_drift = std::max(rep.norm_drift, std::abs(std::sqrt(comp.dot(gram0 * comp)) - speed));
    v.components.push_back(std::move(comp));
  }
  return rep;
}

inline LinearizationReport p_forward(const ManifoldModel& model, const SampledCurve& curve, const Frame& frame0,
                                     const TransportOptions& opts = {}) {
  return p_forward(model, curve, track_curve(model, curve), frame0, opts);
}

/// frame0 defaults to the g-orthonormalized coordinate basis at the basepoint.
inline LinearizationReport p_forward(const ManifoldModel& model, const SampledCurve& curve,
                                     const TransportOptions& opts = {}) {
  return p_forward(model, curve, orthonormal_frame(model, curve.base()), opts);
}

namespace detail {

/// State layout: [x (m), e_1 (m), ..., e_m (m)].
inline Vec pack(const Vec& x, const Mat& e) {
  Vec y(x.size() + e.size());
  y.head(x.size()) = x;
  y.tail(e.size()) = flatten(e);
  return y;
}

}  // namespace detail

inline InverseResult p_inverse(const ManifoldModel& model, const TangentCurve& v, const TransportOptions& opts = {}) {
  validate_tangent_curve(model, v);
  require_differentiable(v.grid);
  const std::size_t n = v.grid.size();
  const std::size_t b = v.base_index;
  const Eigen::Index m = model.dim();
  const std::vector<Vec> dv = differentiate(v.components, v.grid);

  InverseResult out;
  out.curve.grid = v.grid;
  out.curve.base_index = b;
  out.curve.order = v.order + 1;
  out.curve.points.resize(n);
  out.frames.frames.resize(n);

  // Base node, with the continuation rule applied before the first step.
  Frame start = v.frame0;
  {
    std::vector<ChartSwitch> log;
    const ChartId c = detail::continue_chart(model, v.base, v.base.chart, b, log);
    start = push_frame(model, v.frame0, c);
  }
  out.curve.points[b] = start.base;
  out.frames.frames[b] = start;

  auto step = [&](std::size_t from, std::size_t to) {
    const Frame& f = out.frames.frames[from];
    const ChartId chart = f.base.chart;
    const std::size_t j = std::min(from, to);
    const Hermite vpath{v.grid[j], v.grid[j + 1], v.components[j], v.components[j + 1], dv[j], dv[j + 1]};
    auto rhs = [&](double t, const Vec& y) -> Vec {
      const Vec x = y.head(m);
      const Mat e = detail::unflatten(y.tail(m * m), m);
      const Vec r = e * vpath.value(t);
      const Mat a = model.christoffel(chart, x).contract(r);
      return detail::pack(r, -a * e);
    };
    Vec y;
    try {
      y = rk4_advance(rhs, v.grid[from], v.grid[to], detail::pack(f.base.coords, f.columns), opts.substeps);
    } catch (const NonFiniteState& e) {
      throw NonFiniteState(e.what(), to);
    }
    Frame next{Point{chart, y.head(m)}, detail::unflatten(y.tail(m * m), m)};
    const Domain d = model.domain_test(chart, next.base.coords);
    if (d == Domain::outside) {
      throw ChartContinuationFailure("trajectory left chart " + std::to_string(chart), to);
    }
    if (d == Domain::margin) {
      const ChartId c = best_chart(model, next.base);
      if (c != chart) {
        out.frames.switch_log.push_back(ChartSwitch{to, chart, c});
        next = push_frame(model, next, c);
      }
    }
    if (opts.repair_drift) {
      const Mat gram0 = frame_gram(model, start);
      for (Eigen::Index i = 0; i < m; ++i) {
        const double nrm = g_norm(model, next.base, next.columns.col(i));
        if (nrm > 0) next.columns.col(i) *= std::sqrt(gram0(i, i)) / nrm;
      }
    }
    out.curve.points[to] = next.base;
    out.frames.frames[to] = std::move(next);
  };
  for (std::size_t j = b; j + 1 < n; ++j) step(j, j + 1);
  for (std::size_t j = b; j > 0; --j) step(j, j - 1);
  return out;
}

inline TangentCurve with_components(const TangentCurve& like, std::vector<Vec> components) {
  TangentCurve v = like;
  v.components = std::move(components);
  return v;
}

/// max_j dist(p_inverse(p_forward(curve))_j, curve_j).
inline RoundtripReport roundtrip_check(const ManifoldModel& model, const SampledCurve& curve,
                                       const TransportOptions& opts = {}) {
  RoundtripReport rep;
  rep.forward = p_forward(model, curve, opts);
  const InverseResult back = p_inverse(model, rep.forward.tangent_curve, opts);
  rep.metric = distance_kind(model);
  for (std::size_t j = 0; j < curve.points.size(); ++j) {
    rep.max_distance = std::max(rep.max_distance, point_distance(model, back.curve.points[j], curve.points[j]));
  }
  return rep;
}

inline double max_curve_distance(const ManifoldModel& model, const SampledCurve& a, const SampledCurve& b) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.points.size(); ++j) {
    worst = std::max(worst, point_distance(model, a.points[j], b.points[j]));
  }
  return worst;
}

/// Linearize in frame A, re-express the same tangent curve in frame B, and
/// compare the two reconstructions.
inline double basis_independence_check(const ManifoldModel& model, const SampledCurve& curve, const Frame& frame_a,
                                       const Frame& frame_b, const TransportOptions& opts = {}) {
  const TangentCurve va = p_forward(model, curve, frame_a, opts).tangent_curve;
  const ChartId c = va.base.chart;
  const Mat a = push_frame(model, frame_a, c).columns;
  const Frame fb = push_frame(model, frame_b, c);
  const Mat change = fb.columns.partialPivLu().solve(a);
  TangentCurve vb = va;
  vb.frame0 = fb;
  for (auto& comp : vb.components) comp = change * comp;
  const InverseResult ga = p_inverse(model, va, opts);
  const InverseResult gb = p_inverse(model, vb, opts);
  return max_curve_distance(model, ga.curve, gb.curve);
}

/// Same tangent curve, integrated from the basepoint expressed in two charts.
inline double chart_independence_check(const ManifoldModel& model, const SampledCurve& curve, ChartId chart_a,
                                       ChartId chart_b, const TransportOptions& opts = {}) {
  const TangentCurve v = p_forward(model, curve, opts).tangent_curve;
  auto in_chart = [&](ChartId c) {
    TangentCurve w = v;
    w.frame0 = push_frame(model, v.frame0, c);
    w.base = w.frame0.base;
    return w;
  };
  const InverseResult ga = p_inverse(model, in_chart(chart_a), opts);
  const InverseResult gb = p_inverse(model, in_chart(chart_b), opts);
  return max_curve_distance(model, ga.curve, gb.curve);
}

/// Pull a tangent curve on [-a, a] back to [-1, 1]: w(s) = a v(a s).
inline TangentCurve rescale_to_unit(const TangentCurve& v, double a) {
  if (!(a > 0)) throw ValidationError("rescale factor must be positive");
  if (a == 1.0) return v;
  std::vector<double> nodes = v.grid.nodes();
  for (double& t : nodes) t /= a;
  TangentCurve w = v;
  w.grid = v.grid.is_uniform() ? Grid::uniform(nodes.front(), nodes.back(), v.grid.intervals())
                               : Grid::from_nodes(nodes);
  for (auto& c : w.components) c *= a;
  return w;
}

}  // namespace pathlin
