#pragma once

// Flows of compactly supported carrier fields and the trivializations built
// from them.
//
// For p, q with d(p, q) < r0(p)/2 the carrier field is
//
//     Y(p,q)(m) = rho(d(p, m)) * d/dt|_0 Exp_p(Log_p(m) + t Log_p(q)),
//
// with rho = 1 up to r0/2 and 0 from 2 r0/3 on. Along t -> Exp_p(t Log_p q)
// it is the geodesic velocity, so its time-1 flow carries p to q.

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pathlin/linearize.hpp"

namespace pathlin {

// ---------------------------------------------------------------------------
// Exponential map: oracle when the model has one, geodesic shooting otherwise.

struct ShootingOptions {
  std::size_t intervals = 64;
  double tolerance = 1e-9;
  int max_iterations = 50;
  double jacobian_step = 1e-6;
};

class ExpMap {
 public:
  explicit ExpMap(const ManifoldModel& model, ShootingOptions opts = {}) : model_(model), opts_(opts) {}

  const ManifoldModel& model() const { return model_; }
  bool uses_oracle() const { return model_.has_oracle(); }

  Point exp(const Point& p, const Vec& v) const {
    if (uses_oracle()) return model_.oracle_exp(p, v);
    return shoot(p, v);
  }

  /// Geodesic shooting: p_inverse of the constant tangent curve v in the
  /// coordinate frame at p.
  Point shoot(const Point& p, const Vec& v) const {
    TangentCurve tc;
    tc.base = p;
    tc.frame0 = coordinate_frame(model_, p);
    tc.grid = Grid::uniform(0.0, 1.0, opts_.intervals);
    tc.components.assign(tc.grid.size(), v);
    return p_inverse(model_, tc).curve.points.back();
  }

  Vec log(const Point& p, const Point& q) const {
    if (uses_oracle()) return log_oracle(model_, p, q).components;
    return shooting_log(p, q);
  }

  /// Infinite when shooting cannot reach q inside r0(p).
  double dist(const Point& p, const Point& q) const {
    if (uses_oracle()) return model_.oracle_dist(p, q);
    try {
      return g_norm(model_, p, shooting_log(p, q));
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  }

  /// Damped Newton on v so that shoot(p, v) = q, finite-difference Jacobian.
  Vec shooting_log(const Point& p, const Point& q) const {
    const ChartId qc = best_chart(model_, q);
    const Vec target = transition(model_, q, qc).coords;
    auto residual = [&](const Vec& v) -> Vec {
      const Point e = shoot(p, v);
      return transition(model_, e, qc).coords - target;
    };
    Vec v;
    try {
      v = transition(model_, q, p.chart).coords - p.coords;
    } catch (const NoOverlap&) {
      v = Vec::Zero(model_.dim());
    }
    Vec r = residual(v);
    for (int it = 0; it < opts_.max_iterations && r.norm() > opts_.tolerance; ++it) {
      const Eigen::Index m = v.size();
      Mat jac(m, m);
      for (Eigen::Index k = 0; k < m; ++k) {
        Vec dv = Vec::Zero(m);
        dv(k) = opts_.jacobian_step;
        jac.col(k) = (residual(v + dv) - residual(v - dv)) / (2.0 * opts_.jacobian_step);
      }
      const Vec step = jac.partialPivLu().solve(-r);
      double lambda = 1.0;
      Vec trial = v + step;
      Vec rt = residual(trial);
      while (rt.norm() >= r.norm() && lambda > 1e-4) {
        lambda *= 0.5;
        trial = v + lambda * step;
        rt = residual(trial);
      }
      v = trial;
      r = rt;
    }
    if (!(r.norm() <= opts_.tolerance)) throw OutOfInjectivityRange("shooting did not converge");
    if (!(g_norm(model_, p, v) < model_.r0(p))) throw OutOfInjectivityRange("d(p,q) >= r0(p)");
    return v;
  }

 private:
  const ManifoldModel& model_;
  ShootingOptions opts_;
};

// ---------------------------------------------------------------------------
// Carrier field

struct CarrierFieldSpec {
  Point p;
  Point q;
  /// Log_p(q), components in p's chart.
  Vec q_log;
  double r0 = 0.0;
  double r_in = 0.0;
  double r_out = 0.0;
};

/// Canonical smooth step: 0 for x <= 0, 1 for x >= 1.
inline double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

/// Cutoff: 1 for d <= r_in, 0 for d >= r_out.
inline double cutoff(const CarrierFieldSpec& spec, double d) {
  return 1.0 - smooth_step((d - spec.r_in) / (spec.r_out - spec.r_in));
}

inline CarrierFieldSpec make_carrier_spec(const ExpMap& expmap, const Point& p, const Point& q) {
  const ManifoldModel& model = expmap.model();
  CarrierFieldSpec s;
  s.p = p;
  s.q = q;
  s.r0 = model.r0(p);
  s.r_in = s.r0 / 2.0;
  s.r_out = 2.0 * s.r0 / 3.0;
  const double d = expmap.dist(p, q);
  if (!(d < s.r_in)) {
    throw OutOfInjectivityRange("carrier field needs d(p,q) < r0(p)/2, got " + std::to_string(d));
  }
  s.q_log = expmap.log(p, q);
  return s;
}

inline Tangent carrier_field(const ExpMap& expmap, const CarrierFieldSpec& spec, const Point& m) {
  const ManifoldModel& model = expmap.model();
  const double d = expmap.dist(spec.p, m);
  if (d >= spec.r_out || spec.q_log.norm() == 0.0) return Tangent{m, Vec::Zero(model.dim())};
  const Vec m_log = expmap.log(spec.p, m);
  // Differentiate in a chart where m sits comfortably, then move back.
  const ChartId work = best_chart(model, m);
  auto at = [&](double s) { return transition(model, expmap.exp(spec.p, m_log + s * spec.q_log), work).coords; };
  const double h = 1e-3;
  const Vec y1 = (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12.0 * h);
  const Point mw = transition(model, m, work);
  const Tangent y{mw, cutoff(spec, d) * y1};
  return push_tangent(model, y, m.chart);
}

struct FlowOptions {
  int steps_per_unit_time = 128;
};

/// Time-T flow of the carrier field from m (RK4, chart switches between steps).
inline Point flow(const ExpMap& expmap, const CarrierFieldSpec& spec, const Point& m, double T,
                  const FlowOptions& opts = {}) {
  const ManifoldModel& model = expmap.model();
  if (T == 0.0) return m;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(T) * opts.steps_per_unit_time)));
  const double h = T / steps;
  Point x = m;
  for (int k = 0; k < steps; ++k) {
    if (model.domain_test(x.chart, x.coords) != Domain::inside) x = rechart(model, x);
    const ChartId c = x.chart;
    auto rhs = [&](double, const Vec& y) -> Vec {
      if (!y.allFinite() || model.domain_test(c, y) == Domain::outside) {
        throw NonFiniteState("flow left chart " + std::to_string(c));
      }
      return carrier_field(expmap, spec, Point{c, y}).components;
    };
    x.coords = rk4_step(rhs, h * k, x.coords, h);
    check_finite(x.coords, h * (k + 1));
  }
  return x;
}

inline Point phi(const ExpMap& expmap, const CarrierFieldSpec& spec, const Point& m, const FlowOptions& opts = {}) {
  return flow(expmap, spec, m, 1.0, opts);
}

// ---------------------------------------------------------------------------
// Trivialization of the evaluation bundle near p

class TrivializationChart {
 public:
  TrivializationChart(const ExpMap& expmap, Point p, FlowOptions opts = {})
      : expmap_(expmap), p_(std::move(p)), opts_(opts) {}

  const Point& base() const { return p_; }

  /// Carrier spec for (p, m), memoized on (chart, coordinate bits, resolution).
  CarrierFieldSpec spec_for(const Point& m) const {
    const Key key = make_key(m);
    {
      std::shared_lock lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    CarrierFieldSpec spec = make_carrier_spec(expmap_, p_, m);
    std::unique_lock lock(mutex_);
    return cache_.try_emplace(key, std::move(spec)).first->second;
  }

  /// F(m, gamma) = phi_{p,m} o gamma.
  SampledCurve trivialize(const Point& m, const SampledCurve& gamma) const {
    require_same_point(expmap_.model(), gamma.base(), p_, "curve basepoint");
    const CarrierFieldSpec spec = spec_for(m);
    SampledCurve out = gamma;
    for (auto& pt : out.points) pt = flow(expmap_, spec, pt, 1.0, opts_);
    return out;
  }

  /// F^-1(sigma) = (sigma(0), phi_{p,sigma(0)}^-1 o sigma).
  std::pair<Point, SampledCurve> untrivialize(const SampledCurve& sigma) const {
    const Point m = sigma.base();
    const CarrierFieldSpec spec = spec_for(m);
    SampledCurve out = sigma;
    for (auto& pt : out.points) pt = flow(expmap_, spec, pt, -1.0, opts_);
    return {m, out};
  }

  std::size_t cache_size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
  }

 private:
  using Key = std::tuple<ChartId, std::vector<std::uint64_t>, int>;

  Key make_key(const Point& m) const {
    std::vector<std::uint64_t> bits(static_cast<std::size_t>(m.coords.size()));
    for (Eigen::Index i = 0; i < m.coords.size(); ++i) {
      std::memcpy(&bits[static_cast<std::size_t>(i)], &m.coords(i), sizeof(double));
    }
    return {m.chart, std::move(bits), opts_.steps_per_unit_time};
  }

  const ExpMap& expmap_;
  Point p_;
  FlowOptions opts_;
  mutable std::shared_mutex mutex_;
  mutable std::map<Key, CarrierFieldSpec> cache_;
};

// ---------------------------------------------------------------------------
// Mapping-space charts around a reference curve

/// beta(x) = Exp^-1_{gamma_ref(x)} f(x) at every node.
inline std::vector<Tangent> mapping_chart_in(const ExpMap& expmap, const SampledCurve& gamma_ref,
                                             const SampledCurve& f) {
  if (gamma_ref.points.size() != f.points.size()) throw ValidationError("curves differ in length");
  std::vector<Tangent> out;
  out.reserve(f.points.size());
  for (std::size_t j = 0; j < f.points.size(); ++j) {
    const Point& g = gamma_ref.points[j];
    try {
      out.push_back(Tangent{g, expmap.log(g, f.points[j])});
    } catch (const OutOfInjectivityRange& e) {
      throw OutOfInjectivityRange(std::string("node ") + std::to_string(j) + ": " + e.what(), j);
    }
  }
  return out;
}

/// x -> Exp_{gamma_ref(x)} beta(x).
inline SampledCurve mapping_chart_out(const ExpMap& expmap, const SampledCurve& gamma_ref,
                                      const std::vector<Tangent>& section) {
  if (gamma_ref.points.size() != section.size()) throw ValidationError("section and curve differ in length");
  SampledCurve out = gamma_ref;
  for (std::size_t j = 0; j < section.size(); ++j) {
    const Point& g = gamma_ref.points[j];
    const Tangent b = push_tangent(expmap.model(), section[j], g.chart);
    out.points[j] = expmap.exp(g, b.components);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Arc-length normalization

struct ArclengthOptions {
  /// Hermite dense output inversion tolerance on s.
  double tolerance = 1e-14;
};

/// Unit-speed reparametrization gamma o s^{-1}, s(t) = int_{t_0}^t |gamma'|_g,
/// on a uniform grid over [0, length] with the same node count.
inline SampledCurve arclength_normalize(const ManifoldModel& model, const SampledCurve& gamma, double immersion_floor,
                                        const ArclengthOptions& opts = {}) {
  if (!(immersion_floor > 0)) throw ValidationError("immersion floor must be positive");
  if (gamma.base_index != 0) throw ValidationError("arc-length normalization expects base_index 0");
  const CurveTrack track = track_curve(model, gamma);
  const std::size_t n = gamma.grid.size();
  std::vector<Vec> speed(n, Vec(1));
  for (std::size_t j = 0; j < n; ++j) {
    const double sp = g_norm(model, track.node_point(j), track.velocity[j]);
    if (!(sp > immersion_floor)) {
      throw NotImmersed("speed " + std::to_string(sp) + " at node " + std::to_string(j) + " is below the floor", j);
    }
    speed[j](0) = sp;
  }
  const std::vector<Vec> dspeed = differentiate(speed, gamma.grid);
  std::vector<Hermite> speed_path(n - 1);
  std::vector<double> s(n, 0.0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    speed_path[j] = Hermite{gamma.grid[j], gamma.grid[j + 1], speed[j], speed[j + 1], dspeed[j], dspeed[j + 1]};
    s[j + 1] = s[j] + speed_path[j].integral(gamma.grid[j + 1])(0);
  }
  const double length = s.back();
  const Grid out_grid = Grid::uniform(0.0, length, gamma.grid.intervals());

  SampledCurve out;
  out.grid = out_grid;
  out.order = gamma.order;
  out.base_index = 0;
  out.points.reserve(n);
  out.points.push_back(gamma.points.front());
  std::size_t j = 0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double target = out_grid[k];
    while (j + 2 < n && s[j + 1] < target) ++j;
    // Newton on s_j + int_{t_j}^t speed = target, safeguarded by bisection.
    double lo = gamma.grid[j], hi = gamma.grid[j + 1];
    double t = lo + (hi - lo) * (target - s[j]) / (s[j + 1] - s[j]);
    for (int it = 0; it < 60; ++it) {
      const double f = s[j] + speed_path[j].integral(t)(0) - target;
      if (std::abs(f) <= opts.tolerance * std::max(1.0, length)) break;
      if (f > 0) hi = t;
      else lo = t;
      const double fp = speed_path[j].value(t)(0);
      double next = t - f / fp;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      t = next;
    }
    out.points.push_back(Point{track.interval_chart[j], track.interval_path[j].value(t)});
  }
  out.points.push_back(gamma.points.back());
  return out;
}

}  // namespace pathlin
