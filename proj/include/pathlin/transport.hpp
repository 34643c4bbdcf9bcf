#pragma once

// Parallel transport along sampled curves.
//
// A sampled curve is data: velocities come from fourth-order finite
// differences of the node coordinates, and positions between nodes from the
// cubic Hermite built on those velocities. Transport integrates
//
//     d e_i^l / dt = - e_i^j Gamma^l_{kj}(x(t)) r^k(t)
//
// with RK4, re-expressing the state in a new chart only at nodes.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pathlin/geometry.hpp"
#include "pathlin/numerics.hpp"

namespace pathlin {

struct SampledCurve {
  Grid grid;
  std::vector<Point> points;
  /// Declared regularity k of the sampled C^k curve.
  int order = 3;
  /// Node holding the basepoint: 0 on [0, 1], the middle node on [-1, 1].
  std::size_t base_index = 0;

  const Point& base() const { return points.at(base_index); }
};

struct ChartSwitch {
  std::size_t node = 0;
  ChartId from = 0;
  ChartId to = 0;
};

struct TransportOptions {
  int substeps = 2;
  /// Re-normalize frame columns to their initial g-norms at every node.
  bool repair_drift = false;
};

struct FrameField {
  std::vector<Frame> frames;
  std::vector<ChartSwitch> switch_log;
};

/// Chart bookkeeping for one sampled curve. Node charts follow the
/// continuation rule outward from the base node; interval j (t_j..t_{j+1})
/// is integrated in the chart of its end nearer the base.
struct CurveTrack {
  std::vector<ChartId> node_chart;
  std::vector<Vec> coords;
  std::vector<Vec> velocity;
  std::vector<ChartId> interval_chart;
  std::vector<Hermite> interval_path;
  std::vector<ChartSwitch> switches;

  Point node_point(std::size_t j) const { return Point{node_chart[j], coords[j]}; }
  Tangent node_velocity(std::size_t j) const { return Tangent{node_point(j), velocity[j]}; }
};

inline void validate_curve(const ManifoldModel& model, const SampledCurve& curve) {
  if (curve.points.size() != curve.grid.size()) {
    throw ValidationError("curve has " + std::to_string(curve.points.size()) + " samples but the grid has " +
                          std::to_string(curve.grid.size()) + " nodes");
  }
  if (curve.base_index >= curve.points.size()) throw ValidationError("base_index out of range");
  if (curve.order < 1) throw ValidationError("curve order must be >= 1");
  for (std::size_t j = 0; j < curve.points.size(); ++j) {
    const Point& p = curve.points[j];
    if (p.chart < 0 || p.chart >= static_cast<ChartId>(model.charts().size())) {
      throw ValidationError("sample " + std::to_string(j) + " has unknown chart " + std::to_string(p.chart));
    }
    if (p.coords.size() != model.dim()) {
      throw ValidationError("sample " + std::to_string(j) + " has wrong coordinate count");
    }
    if (model.domain_test(p.chart, p.coords) == Domain::outside) {
      throw ValidationError("sample " + std::to_string(j) + " lies outside its chart");
    }
  }
}

namespace detail {

inline Vec coords_in(const ManifoldModel& model, const Point& p, ChartId chart, std::size_t node) {
  if (p.chart == chart) return p.coords;
  Vec x = model.change_coords(p.chart, chart, p.coords);
  if (!x.allFinite() || model.domain_test(chart, x) == Domain::outside) {
    throw ChartContinuationFailure("sample " + std::to_string(node) + " is not representable in chart " +
                                       std::to_string(chart),
                                   node);
  }
  return x;
}

/// Continuation step: keep `current` while the point is inside it.
inline ChartId continue_chart(const ManifoldModel& model, const Point& p, ChartId current, std::size_t node,
                              std::vector<ChartSwitch>& log) {
  if (p.chart == current ? model.domain_test(current, p.coords) == Domain::inside : [&] {
        const Vec x = model.change_coords(p.chart, current, p.coords);
        return x.allFinite() && model.domain_test(current, x) == Domain::inside;
      }()) {
    return current;
  }
  const ChartId next = best_chart(model, p);
  if (next != current) log.push_back(ChartSwitch{node, current, next});
  return next;
}

}  // namespace detail

inline CurveTrack track_curve(const ManifoldModel& model, const SampledCurve& curve) {
  validate_curve(model, curve);
  require_differentiable(curve.grid);
  const std::size_t n = curve.points.size();
  const std::size_t b = curve.base_index;
  CurveTrack tr;
  tr.node_chart.assign(n, 0);

  std::vector<ChartSwitch> log;
  tr.node_chart[b] = detail::continue_chart(model, curve.points[b], curve.points[b].chart, b, log);
  for (std::size_t j = b + 1; j < n; ++j) {
    tr.node_chart[j] = detail::continue_chart(model, curve.points[j], tr.node_chart[j - 1], j, log);
  }
  for (std::size_t j = b; j-- > 0;) {
    tr.node_chart[j] = detail::continue_chart(model, curve.points[j], tr.node_chart[j + 1], j, log);
  }
  tr.switches = std::move(log);

  tr.coords.resize(n);
  for (std::size_t j = 0; j < n; ++j) tr.coords[j] = detail::coords_in(model, curve.points[j], tr.node_chart[j], j);

  tr.velocity.resize(n);
  const double h = curve.grid.step();
  for (std::size_t j = 0; j < n; ++j) {
    const Stencil s = stencil_at(n, j, h);
    Vec r = Vec::Zero(model.dim());
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
      const std::size_t k = s.nodes[i];
      const Vec x = k == j ? tr.coords[j] : detail::coords_in(model, curve.points[k], tr.node_chart[j], j);
      r += s.weights[i] * (x - tr.coords[j]);
    }
    tr.velocity[j] = std::move(r);
  }

  tr.interval_chart.resize(n - 1);
  tr.interval_path.resize(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const std::size_t near = j >= b ? j : j + 1;
    const ChartId c = tr.node_chart[near];
    tr.interval_chart[j] = c;
    auto end_data = [&](std::size_t k) {
      if (tr.node_chart[k] == c) return std::make_pair(tr.coords[k], tr.velocity[k]);
      const Vec x = detail::coords_in(model, curve.points[k], c, k);
      const Vec r = model.change_jacobian(tr.node_chart[k], c, tr.coords[k]) * tr.velocity[k];
      return std::make_pair(x, r);
    };
    auto [x0, r0] = end_data(j);
    auto [x1, r1] = end_data(j + 1);
    tr.interval_path[j] = Hermite{curve.grid[j], curve.grid[j + 1], x0, x1, r0, r1};
  }
  return tr;
}

/// Curve position at an arbitrary parameter, by the interval's Hermite path.
inline Point curve_point_at(const SampledCurve& curve, const CurveTrack& track, double t) {
  const std::size_t node = curve.grid.node_at(t);
  if (node != Grid::npos) return track.node_point(node);
  const std::size_t j = curve.grid.locate(t);
  return Point{track.interval_chart[j], track.interval_path[j].value(t)};
}

namespace detail {

inline Vec flatten(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

inline Mat unflatten(const Vec& v, Eigen::Index rows) {
  return Eigen::Map<const Mat>(v.data(), rows, v.size() / rows);
}

/// Integrate columns (already in the interval chart) across [ta, tb] inside interval j.
inline Mat advance_in_interval(const ManifoldModel& model, const CurveTrack& track, std::size_t j, double ta,
                               double tb, const Mat& columns, int substeps) {
  const Hermite& path = track.interval_path[j];
  const ChartId chart = track.interval_chart[j];
  const Eigen::Index m = columns.rows();
  auto rhs = [&](double t, const Vec& y) -> Vec {
    const Vec x = path.value(t);
    const Vec r = path.derivative(t);
    const Mat a = model.christoffel(chart, x).contract(r);
    return flatten(-a * unflatten(y, m));
  };
  const double full = path.t1 - path.t0;
  const int steps = std::max(1, static_cast<int>(std::ceil(substeps * std::abs(tb - ta) / full - 1e-9)));
  return unflatten(rk4_advance(rhs, ta, tb, flatten(columns), steps), m);
}

inline void renormalize(const ManifoldModel& model, Frame& f, const Vec& target_norms) {
  for (Eigen::Index i = 0; i < f.columns.cols(); ++i) {
    const double n = g_norm(model, f.base, f.columns.col(i));
    if (n > 0) f.columns.col(i) *= target_norms(i) / n;
  }
}

}  // namespace detail

/// Transport `state` (columns based at curve(t_from)) to curve(t_to).
/// The result is expressed in the node chart when t_to is a node, otherwise
/// in the chart of the interval containing t_to.
inline Frame march(const ManifoldModel& model, const SampledCurve& curve, const CurveTrack& track, Frame state,
                   double t_from, double t_to, const TransportOptions& opts = {}) {
  const Grid& grid = curve.grid;
  const double eps = 1e-12 * std::max(1.0, grid.end() - grid.start());
  if (t_from < grid.start() - eps || t_from > grid.end() + eps || t_to < grid.start() - eps ||
      t_to > grid.end() + eps) {
    throw ValidationError("transport times outside the curve's grid span");
  }
  double t = t_from;
  const bool forward = t_to > t_from;
  while (std::abs(t_to - t) > eps) {
    std::size_t j;
    const std::size_t node = grid.node_at(t);
    if (node != Grid::npos) {
      j = forward ? node : node - 1;
    } else {
      j = grid.locate(t);
    }
    const double t_end = forward ? std::min(t_to, grid[j + 1]) : std::max(t_to, grid[j]);
    const ChartId ic = track.interval_chart[j];
    try {
      state = push_frame(model, state, ic);
    } catch (const NoOverlap& e) {
      throw ChartContinuationFailure(e.what(), j);
    }
    state.columns = detail::advance_in_interval(model, track, j, t, t_end, state.columns, opts.substeps);
    state.base = Point{ic, track.interval_path[j].value(t_end)};
    t = t_end;
  }
  const std::size_t end_node = grid.node_at(t_to);
  if (end_node != Grid::npos) {
    state = push_frame(model, state, track.node_chart[end_node]);
    state.base = track.node_point(end_node);
  }
  return state;
}

/// Parallel frame along the whole curve, started from f0 at the base node.
inline FrameField transport_frame(const ManifoldModel& model, const SampledCurve& curve, const CurveTrack& track,
                                  const Frame& f0, const TransportOptions& opts = {}) {
  const std::size_t n = curve.points.size();
  const std::size_t b = curve.base_index;
  FrameField field;
  field.frames.resize(n);
  Frame start;
  try {
    start = push_frame(model, f0, track.node_chart[b]);
  } catch (const NoOverlap& e) {
    throw ChartContinuationFailure(e.what(), b);
  }
  start.base = track.node_point(b);
  field.frames[b] = start;

  Vec norms(start.columns.cols());
  for (Eigen::Index i = 0; i < norms.size(); ++i) norms(i) = g_norm(model, start.base, start.columns.col(i));

  auto step = [&](std::size_t from, std::size_t to) {
    Frame f = march(model, curve, track, field.frames[from], curve.grid[from], curve.grid[to], opts);
    if (opts.repair_drift) detail::renormalize(model, f, norms);
    field.frames[to] = std::move(f);
  };
  for (std::size_t j = b; j + 1 < n; ++j) step(j, j + 1);
  for (std::size_t j = b; j > 0; --j) step(j, j - 1);
  field.switch_log = track.switches;
  return field;
}

inline FrameField transport_frame(const ManifoldModel& model, const SampledCurve& curve, const Frame& f0,
                                  const TransportOptions& opts = {}) {
  return transport_frame(model, curve, track_curve(model, curve), f0, opts);
}

/// P^{from -> to} along the curve. v must be based at curve(from_t).
inline Tangent transport_vector(const ManifoldModel& model, const SampledCurve& curve, const CurveTrack& track,
                                const Tangent& v, double from_t, double to_t, const TransportOptions& opts = {}) {
  Frame state{v.base, v.components};
  if (from_t == to_t) return v;
  Frame out = march(model, curve, track, state, from_t, to_t, opts);
  return Tangent{out.base, out.columns.col(0)};
}

inline Tangent transport_vector(const ManifoldModel& model, const SampledCurve& curve, const Tangent& v,
                                double from_t, double to_t, const TransportOptions& opts = {}) {
  return transport_vector(model, curve, track_curve(model, curve), v, from_t, to_t, opts);
}

/// Finite-difference velocity per node, in each node's working chart.
inline std::vector<Tangent> velocity_field(const CurveTrack& track) {
  std::vector<Tangent> out;
  out.reserve(track.coords.size());
  for (std::size_t j = 0; j < track.coords.size(); ++j) out.push_back(track.node_velocity(j));
  return out;
}

/// (nabla_gamma' X)^l = dX^l/dt + Gamma^l_{kj} r^k X^j at every node.
inline std::vector<Tangent> covariant_derivative(const ManifoldModel& model, const SampledCurve& curve,
                                                 const CurveTrack& track, const std::vector<Tangent>& field) {
  require_differentiable(curve.grid);
  const std::size_t n = curve.points.size();
  if (field.size() != n) throw ValidationError("field and curve differ in length");
  const double h = curve.grid.step();
  std::vector<Tangent> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const ChartId c = track.node_chart[j];
    const Stencil s = stencil_at(n, j, h);
    const Vec xj = field[j].base.chart == c ? field[j].components : push_tangent(model, field[j], c).components;
    Vec d = Vec::Zero(model.dim());
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
      const Tangent& x = field[s.nodes[i]];
      const Vec comp = x.base.chart == c ? x.components : push_tangent(model, x, c).components;
      d += s.weights[i] * (comp - xj);
    }
    d += model.christoffel(c, track.coords[j]).contract(track.velocity[j]) * xj;
    out.push_back(Tangent{track.node_point(j), d});
  }
  return out;
}

inline std::vector<Tangent> covariant_derivative(const ManifoldModel& model, const SampledCurve& curve,
                                                 const std::vector<Tangent>& field) {
  return covariant_derivative(model, curve, track_curve(model, curve), field);
}

}  // namespace pathlin
