#pragma once

// Chart-atlas manifold abstraction: points, tangents and frames carry the id
// of the chart their coordinates live in; models supply coordinate changes,
// the metric, a metric-compatible connection and (optionally) closed-form
// geodesic oracles.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pathlin/errors.hpp"

namespace pathlin {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using ChartId = int;

enum class Domain { inside, margin, outside };

inline const char* to_string(Domain d) {
  switch (d) {
    case Domain::inside: return "inside";
    case Domain::margin: return "margin";
    case Domain::outside: return "outside";
  }
  return "?";
}

struct ChartSpec {
  ChartId id = 0;
  std::string name;
  Vec center;
  /// Coordinates closer than this to the center are `inside`.
  double trust_radius = 1.0;
  std::string description;
};

struct Point {
  ChartId chart = 0;
  Vec coords;
};

/// Components are with respect to the coordinate basis of base.chart.
struct Tangent {
  Point base;
  Vec components;
};

/// Column i holds the components of the i-th frame vector.
struct Frame {
  Point base;
  Mat columns;
};

/// Connection coefficients at one point: upper[l](k, j) = Gamma^l_{kj}.
struct Christoffel {
  std::vector<Mat> upper;

  /// A(l, j) = Gamma^l_{kj} r^k, so that (nabla_r X)^l = dX^l + A(l, j) X^j.
  Mat contract(const Vec& r) const {
    const auto m = static_cast<Eigen::Index>(upper.size());
    Mat a(m, m);
    for (Eigen::Index l = 0; l < m; ++l) a.row(l) = (upper[l].transpose() * r).transpose();
    return a;
  }
};

class ManifoldModel {
 public:
  virtual ~ManifoldModel() = default;

  virtual std::string name() const = 0;
  virtual std::string description() const = 0;
  virtual int dim() const = 0;
  virtual const std::vector<ChartSpec>& charts() const = 0;

  virtual Domain domain_test(ChartId chart, const Vec& coords) const = 0;

  /// Raw coordinate change. The result may be non-finite or fall outside the
  /// target chart; use transition() for a checked version.
  virtual Vec change_coords(ChartId from, ChartId to, const Vec& coords) const = 0;
  /// d(target coords) / d(source coords) evaluated at `coords` (source chart).
  virtual Mat change_jacobian(ChartId from, ChartId to, const Vec& coords) const = 0;

  virtual Mat metric(ChartId chart, const Vec& coords) const = 0;
  virtual Christoffel christoffel(ChartId chart, const Vec& coords) const = 0;

  /// Conservative lower bound for the injectivity radius at p.
  virtual double r0(const Point& p) const = 0;

  virtual bool has_oracle() const { return false; }
  virtual Point oracle_exp(const Point&, const Vec&) const { throw NoOracle(name()); }
  virtual Vec oracle_log(const Point&, const Point&) const { throw NoOracle(name()); }
  virtual double oracle_dist(const Point&, const Point&) const { throw NoOracle(name()); }

  /// Distance used to rank charts for continuation; smaller is better.
  virtual double center_score(ChartId chart, const Vec& coords) const {
    const auto& spec = charts().at(static_cast<std::size_t>(chart));
    return (coords - spec.center).norm() / spec.trust_radius;
  }
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline Point transition(const ManifoldModel& model, const Point& point, ChartId target) {
  if (point.chart == target) return point;
  Vec coords = model.change_coords(point.chart, target, point.coords);
  if (!coords.allFinite() || model.domain_test(target, coords) == Domain::outside) {
    throw NoOverlap("point of chart " + std::to_string(point.chart) + " is not in chart " +
                    std::to_string(target));
  }
  return Point{target, std::move(coords)};
}

inline Tangent push_tangent(const ManifoldModel& model, const Tangent& t, ChartId target) {
  if (t.base.chart == target) return t;
  Point base = transition(model, t.base, target);
  Mat jac = model.change_jacobian(t.base.chart, target, t.base.coords);
  return Tangent{std::move(base), jac * t.components};
}

inline Frame push_frame(const ManifoldModel& model, const Frame& f, ChartId target) {
  if (f.base.chart == target) return f;
  Point base = transition(model, f.base, target);
  Mat jac = model.change_jacobian(f.base.chart, target, f.base.coords);
  return Frame{std::move(base), jac * f.columns};
}

inline double g_inner(const ManifoldModel& model, const Point& at, const Vec& a, const Vec& b) {
  return a.dot(model.metric(at.chart, at.coords) * b);
}

inline double g_norm(const ManifoldModel& model, const Point& at, const Vec& a) {
  return std::sqrt(std::max(0.0, g_inner(model, at, a, a)));
}

inline double g_norm(const ManifoldModel& model, const Tangent& t) {
  return g_norm(model, t.base, t.components);
}

/// Continuation rule: the admissible chart whose center is nearest,
/// ties going to the lowest chart id.
inline ChartId best_chart(const ManifoldModel& model, const Point& point) {
  ChartId best = -1;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& spec : model.charts()) {
    Vec coords = spec.id == point.chart ? point.coords
                                        : model.change_coords(point.chart, spec.id, point.coords);
    if (!coords.allFinite() || model.domain_test(spec.id, coords) == Domain::outside) continue;
    const double score = model.center_score(spec.id, coords);
    if (score < best_score) {
      best_score = score;
      best = spec.id;
    }
  }
  if (best < 0) throw ChartContinuationFailure("no chart admits the point");
  return best;
}

inline Point rechart(const ManifoldModel& model, const Point& point) {
  return transition(model, point, best_chart(model, point));
}

/// Gram-Schmidt of the coordinate basis with respect to g, in column order.
inline Frame orthonormal_frame(const ManifoldModel& model, const Point& p) {
  const int m = model.dim();
  const Mat g = model.metric(p.chart, p.coords);
  Mat cols = Mat::Identity(m, m);
  for (int i = 0; i < m; ++i) {
    Vec c = cols.col(i);
    for (int j = 0; j < i; ++j) c -= cols.col(j).dot(g * c) * cols.col(j);
    cols.col(i) = c / std::sqrt(c.dot(g * c));
  }
  return Frame{p, cols};
}

inline Frame coordinate_frame(const ManifoldModel& model, const Point& p) {
  return Frame{p, Mat::Identity(model.dim(), model.dim())};
}

/// Columns independent, with the determinant measured relative to the column norms.
inline bool frame_is_valid(const Frame& f, double tol = 1e-10) {
  if (f.columns.rows() != f.columns.cols() || !f.columns.allFinite()) return false;
  double scale = 1.0;
  for (Eigen::Index i = 0; i < f.columns.cols(); ++i) scale *= f.columns.col(i).norm();
  if (scale == 0.0) return false;
  return std::abs(f.columns.determinant()) / scale > tol;
}

inline Mat frame_gram(const ManifoldModel& model, const Frame& f) {
  return f.columns.transpose() * model.metric(f.base.chart, f.base.coords) * f.columns;
}

/// Largest entry of  d_k g_ij - Gamma^l_{ki} g_lj - Gamma^l_{kj} g_il  with
/// d_k from a five-point central difference.
inline double metric_compatibility_residual(const ManifoldModel& model, ChartId chart,
                                            const Vec& coords, double step = 1e-4) {
  const int m = model.dim();
  const Mat g = model.metric(chart, coords);
  const Christoffel gam = model.christoffel(chart, coords);
  double worst = 0.0;
  for (int k = 0; k < m; ++k) {
    auto at = [&](double s) {
      Vec x = coords;
      x(k) += s;
      return model.metric(chart, x);
    };
    const Mat dg = (at(-2 * step) - 8.0 * at(-step) + 8.0 * at(step) - at(2 * step)) / (12.0 * step);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        double r = dg(i, j);
        for (int l = 0; l < m; ++l) {
          r -= gam.upper[l](k, i) * g(l, j) + gam.upper[l](k, j) * g(i, l);
        }
        worst = std::max(worst, std::abs(r));
      }
    }
  }
  return worst;
}

// Oracle front-ends with precondition checks.

inline Point exp_oracle(const ManifoldModel& model, const Point& p, const Tangent& v) {
  if (!model.has_oracle()) throw NoOracle(model.name());
  Tangent at_p = push_tangent(model, v, p.chart);
  return model.oracle_exp(p, at_p.components);
}

inline double dist_oracle(const ManifoldModel& model, const Point& p, const Point& q) {
  if (!model.has_oracle()) throw NoOracle(model.name());
  return model.oracle_dist(p, q);
}

inline Tangent log_oracle(const ManifoldModel& model, const Point& p, const Point& q) {
  if (!model.has_oracle()) throw NoOracle(model.name());
  const double d = model.oracle_dist(p, q);
  if (!(d < model.r0(p))) {
    throw OutOfInjectivityRange("d(p,q) = " + std::to_string(d) + " >= r0(p) = " +
                                std::to_string(model.r0(p)));
  }
  return Tangent{p, model.oracle_log(p, q)};
}

/// Oracle distance when the model has one, otherwise coordinate distance
/// after moving b into a's chart.
inline double point_distance(const ManifoldModel& model, const Point& a, const Point& b) {
  if (model.has_oracle()) return model.oracle_dist(a, b);
  return (transition(model, b, a.chart).coords - a.coords).norm();
}

inline const char* distance_kind(const ManifoldModel& model) {
  return model.has_oracle() ? "oracle" : "coordinate";
}

}  // namespace pathlin
