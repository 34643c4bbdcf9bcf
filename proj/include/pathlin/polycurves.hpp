#pragma once

// Polynomial-like curves: nabla^(n)_{gamma'} gamma' = 0. Since P turns
// covariant differentiation along gamma into ordinary differentiation of
// P(gamma), they are exactly the images under P^-1 of polynomial tangent
// curves, which gives approximation (fit P(gamma), map back) and Taylor
// coefficients (differentiate P(gamma) at the basepoint).

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pathlin/linearize.hpp"

namespace pathlin {

struct PolyLikeCurve {
  Point base;
  Frame frame0;
  PolyCoeffs coeffs;
  SampledCurve realized;
  /// covariant_power_residual(realized, degree + 1); NaN when the grid is too coarse.
  double residual = std::numeric_limits<double>::quiet_NaN();
};

/// Sup over interior nodes of |nabla^(n) gamma'|_g, skipping 2(n + 1) nodes at
/// each end: gamma' is itself a stencil, so n + 1 nested levels each carry the
/// shifted end stencils two nodes further in.
inline double covariant_power_residual(const ManifoldModel& model, const SampledCurve& curve, int n) {
  if (n < 1) throw ValidationError("n must be >= 1");
  const std::size_t nodes = curve.grid.size();
  if (curve.grid.intervals() < 4 * static_cast<std::size_t>(n + 1)) {
    throw GridTooCoarse("need N >= 4(n + 1) = " + std::to_string(4 * (n + 1)));
  }
  const CurveTrack track = track_curve(model, curve);
  std::vector<Tangent> field = velocity_field(track);
  for (int k = 0; k < n; ++k) field = covariant_derivative(model, curve, track, field);
  const std::size_t band = 2 * static_cast<std::size_t>(n + 1);
  double worst = 0.0;
  for (std::size_t j = band; j + band < nodes; ++j) worst = std::max(worst, g_norm(model, field[j]));
  return worst;
}

inline PolyLikeCurve make_polynomial_like(const ManifoldModel& model, const Point& p, const Frame& frame0,
                                          const PolyCoeffs& coeffs, const Grid& grid, std::size_t base_index = 0,
                                          const TransportOptions& opts = {}) {
  if (static_cast<int>(coeffs.coeffs.size()) != coeffs.degree + 1) {
    throw ValidationError("coefficient count must be degree + 1");
  }
  TangentCurve v;
  v.base = p;
  v.frame0 = frame0;
  v.grid = grid;
  v.base_index = base_index;
  v.components = eval_poly(coeffs, grid);
  v.order = 8;
  PolyLikeCurve out{p, frame0, coeffs, p_inverse(model, v, opts).curve, std::numeric_limits<double>::quiet_NaN()};
  if (grid.intervals() >= 4 * static_cast<std::size_t>(coeffs.degree + 2)) {
    out.residual = covariant_power_residual(model, out.realized, coeffs.degree + 1);
  }
  return out;
}

/// sup_t | P^{t->0}(nabla_gamma' gamma')(t) - d/dt P(gamma)(t) |, in the frame0 Gram norm.
inline double conjugation_residual(const ManifoldModel& model, const SampledCurve& curve, const Frame& frame0,
                                   const TransportOptions& opts = {}) {
  if (curve.order < 2) throw ValidationError("conjugation residual needs a curve of order >= 2");
  const CurveTrack track = track_curve(model, curve);
  const LinearizationReport rep = p_forward(model, curve, track, frame0, opts);
  const std::vector<Tangent> accel = covariant_derivative(model, curve, track, velocity_field(track));
  const std::vector<Vec> dv = differentiate(rep.tangent_curve.components, curve.grid);
  const Mat gram0 = frame_gram(model, frame0);
  double worst = 0.0;
  for (std::size_t j = 0; j < curve.points.size(); ++j) {
    const Vec lhs = rep.frames.frames[j].columns.partialPivLu().solve(accel[j].components);
    const Vec d = lhs - dv[j];
    worst = std::max(worst, std::sqrt(d.dot(gram0 * d)));
  }
  return worst;
}

inline double conjugation_residual(const ManifoldModel& model, const SampledCurve& curve,
                                   const TransportOptions& opts = {}) {
  return conjugation_residual(model, curve, orthonormal_frame(model, curve.base()), opts);
}

struct WeierstrassReport {
  PolyLikeCurve fit;
  /// sup_t d(fit(t), gamma(t))
  double c0_error = 0.0;
  /// sup_t |P_{fit(t) -> gamma(t)} fit'(t) - gamma'(t)|_g, transport along the short geodesic.
  double c1_error = 0.0;
  /// Least-squares objective in the tangent space (trapezoid-weighted L2).
  double v_residual_l2 = 0.0;
  double v_residual_sup = 0.0;
};

namespace detail {

/// Parallel transport of `v` (at a) to b along the geodesic from a to b,
/// sampled from the oracle exponential map.
inline Tangent transport_along_geodesic(const ManifoldModel& model, const Tangent& v, const Point& b,
                                        std::size_t samples = 8) {
  const Tangent log_ab = log_oracle(model, v.base, b);
  if (log_ab.components.norm() == 0.0) return push_tangent(model, v, b.chart);
  SampledCurve seg;
  seg.grid = Grid::uniform(0.0, 1.0, samples);
  for (std::size_t j = 0; j <= samples; ++j) {
    const double s = static_cast<double>(j) / static_cast<double>(samples);
    seg.points.push_back(j == 0 ? v.base : model.oracle_exp(log_ab.base, s * log_ab.components));
  }
  return transport_vector(model, seg, v, 0.0, 1.0);
}

}  // namespace detail

inline WeierstrassReport weierstrass_fit(const ManifoldModel& model, const SampledCurve& curve, int degree,
                                         Basis basis, const Frame& frame0, const TransportOptions& opts = {}) {
  if (curve.order < 1) throw ValidationError("curve order must be >= 1");
  const CurveTrack track = track_curve(model, curve);
  const TangentCurve v = p_forward(model, curve, track, frame0, opts).tangent_curve;
  const PolyCoeffs coeffs = fit_poly(v.components, curve.grid, degree, basis);
  WeierstrassReport rep;
  rep.fit = make_polynomial_like(model, v.base, frame0, coeffs, curve.grid, curve.base_index, opts);
  const std::vector<Vec> fitted = eval_poly(coeffs, curve.grid);
  rep.v_residual_l2 = weighted_l2_distance(fitted, v.components, curve.grid);
  for (std::size_t j = 0; j < fitted.size(); ++j) {
    rep.v_residual_sup = std::max(rep.v_residual_sup, (fitted[j] - v.components[j]).norm());
  }

  const CurveTrack fit_track = track_curve(model, rep.fit.realized);
  for (std::size_t j = 0; j < curve.points.size(); ++j) {
    const Point target = track.node_point(j);
    rep.c0_error = std::max(rep.c0_error, point_distance(model, rep.fit.realized.points[j], curve.points[j]));
    const Tangent fit_vel = fit_track.node_velocity(j);
    Tangent moved;
    if (model.has_oracle()) {
      moved = detail::transport_along_geodesic(model, fit_vel, target);
    } else {
      moved = push_tangent(model, fit_vel, target.chart);
    }
    const Vec diff = push_tangent(model, moved, target.chart).components - track.velocity[j];
    rep.c1_error = std::max(rep.c1_error, g_norm(model, target, diff));
  }
  return rep;
}

inline WeierstrassReport weierstrass_fit(const ManifoldModel& model, const SampledCurve& curve, int degree,
                                         Basis basis = Basis::bernstein, const TransportOptions& opts = {}) {
  return weierstrass_fit(model, curve, degree, basis, orthonormal_frame(model, curve.base()), opts);
}

/// Derivatives of P(gamma) at the basepoint divided by factorials, in frame0
/// components. One-sided stencils at an end node, centered otherwise.
inline std::vector<Vec> taylor_coefficients(const ManifoldModel& model, const SampledCurve& curve, int q,
                                            const Frame& frame0, const TransportOptions& opts = {}) {
  if (q < 0) throw ValidationError("order must be >= 0");
  if (curve.order < q + 1) throw ValidationError("curve order must be >= q + 1");
  const TangentCurve v = p_forward(model, curve, frame0, opts).tangent_curve;
  const std::size_t n = curve.grid.size();
  const std::size_t b = curve.base_index;
  const double h = curve.grid.step();
  std::vector<Vec> out;
  double factorial = 1.0;
  for (int k = 0; k <= q; ++k) {
    if (k > 0) factorial *= k;
    if (k == 0) {
      out.push_back(v.components[b]);
      continue;
    }
    Stencil s;
    if (b == 0) s = one_sided_stencil(n, b, h, k, 4, true);
    else if (b + 1 == n) s = one_sided_stencil(n, b, h, k, 4, false);
    else s = stencil_at(n, b, h, k, 4);
    Vec d = Vec::Zero(model.dim());
    for (std::size_t i = 0; i < s.nodes.size(); ++i) d += s.weights[i] * (v.components[s.nodes[i]] - v.components[b]);
    out.push_back(d / factorial);
  }
  return out;
}

inline std::vector<Vec> taylor_coefficients(const ManifoldModel& model, const SampledCurve& curve, int q,
                                            const TransportOptions& opts = {}) {
  return taylor_coefficients(model, curve, q, orthonormal_frame(model, curve.base()), opts);
}

}  // namespace pathlin
