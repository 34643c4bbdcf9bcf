#pragma once

// The four shipped model geometries and the name-keyed registry.
//
//   euclidean2   one identity chart, flat.
//   sphere2      unit sphere, chart 0 = stereographic from the south pole
//                (north pole at the origin), chart 1 = stereographic from
//                the north pole (south pole at the origin).
//   hyperbolic2  Poincare disk, curvature -1, single chart |u| < 1.
//   torus2       flat torus R^2 / (2 pi Z)^2 with four angle charts.

#include <algorithm>
#include <array>
#include <complex>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pathlin/geometry.hpp"

namespace pathlin {

struct ModelOptions {
  /// Stand-in injectivity floor for models whose injectivity radius is infinite.
  double r0_cap = 10.0;
};

namespace detail {

/// Connection of the conformal metric exp(2 phi) delta, given grad phi.
inline Christoffel conformal_christoffel(const Vec& grad_phi) {
  const auto m = grad_phi.size();
  Christoffel c;
  c.upper.assign(static_cast<std::size_t>(m), Mat::Zero(m, m));
  for (Eigen::Index l = 0; l < m; ++l) {
    Mat& gl = c.upper[static_cast<std::size_t>(l)];
    for (Eigen::Index k = 0; k < m; ++k) {
      for (Eigen::Index j = 0; j < m; ++j) {
        double v = 0.0;
        if (l == k) v += grad_phi(j);
        if (l == j) v += grad_phi(k);
        if (k == j) v -= grad_phi(l);
        gl(k, j) = v;
      }
    }
  }
  return c;
}

inline Christoffel flat_christoffel(int m) {
  Christoffel c;
  c.upper.assign(static_cast<std::size_t>(m), Mat::Zero(m, m));
  return c;
}

inline Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

inline double wrap_angle(double a) {
  // into [-pi, pi)
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, two_pi);
  if (r < 0) r += two_pi;
  return r - std::numbers::pi;
}

}  // namespace detail

class EuclideanPlane final : public ManifoldModel {
 public:
  explicit EuclideanPlane(ModelOptions opts = {}) : opts_(opts) {
    charts_.push_back(ChartSpec{0, "identity", Vec::Zero(2), std::numeric_limits<double>::infinity(),
                                "Cartesian coordinates (x, y); the whole plane"});
  }

  std::string name() const override { return "euclidean2"; }
  std::string description() const override { return "Euclidean plane R^2 with the flat metric"; }
  int dim() const override { return 2; }
  const std::vector<ChartSpec>& charts() const override { return charts_; }

  Domain domain_test(ChartId, const Vec& x) const override {
    return x.allFinite() ? Domain::inside : Domain::outside;
  }
  Vec change_coords(ChartId, ChartId, const Vec& x) const override { return x; }
  Mat change_jacobian(ChartId, ChartId, const Vec&) const override { return Mat::Identity(2, 2); }
  Mat metric(ChartId, const Vec&) const override { return Mat::Identity(2, 2); }
  Christoffel christoffel(ChartId, const Vec&) const override { return detail::flat_christoffel(2); }
  double r0(const Point&) const override { return opts_.r0_cap; }
  double center_score(ChartId, const Vec&) const override { return 0.0; }

  bool has_oracle() const override { return true; }
  Point oracle_exp(const Point& p, const Vec& v) const override { return Point{0, p.coords + v}; }
  Vec oracle_log(const Point& p, const Point& q) const override { return q.coords - p.coords; }
  double oracle_dist(const Point& p, const Point& q) const override {
    return (q.coords - p.coords).norm();
  }

 private:
  ModelOptions opts_;
  std::vector<ChartSpec> charts_;
};

class UnitSphere final : public ManifoldModel {
 public:
  static constexpr ChartId kNorth = 0;
  static constexpr ChartId kSouth = 1;
  static constexpr double kTrust = 1.5;
  static constexpr double kFar = 1e4;

  UnitSphere() {
    charts_.push_back(ChartSpec{kNorth, "north-stereo", Vec::Zero(2), kTrust,
                                "stereographic projection from the south pole; u = (X, Y) / (1 + Z); "
                                "origin is the north pole"});
    charts_.push_back(ChartSpec{kSouth, "south-stereo", Vec::Zero(2), kTrust,
                                "stereographic projection from the north pole; u = (X, Y) / (1 - Z); "
                                "origin is the south pole"});
  }

  std::string name() const override { return "sphere2"; }
  std::string description() const override {
    return "unit sphere S^2 in R^3 with the round metric, two stereographic charts";
  }
  int dim() const override { return 2; }
  const std::vector<ChartSpec>& charts() const override { return charts_; }

  Domain domain_test(ChartId, const Vec& x) const override {
    if (!x.allFinite()) return Domain::outside;
    const double r = x.norm();
    if (r < kTrust) return Domain::inside;
    if (r < kFar) return Domain::margin;
    return Domain::outside;
  }

  Vec change_coords(ChartId from, ChartId to, const Vec& x) const override {
    if (from == to) return x;
    return x / x.squaredNorm();
  }

  Mat change_jacobian(ChartId from, ChartId to, const Vec& x) const override {
    if (from == to) return Mat::Identity(2, 2);
    const double r2 = x.squaredNorm();
    return (Mat::Identity(2, 2) * r2 - 2.0 * x * x.transpose()) / (r2 * r2);
  }

  Mat metric(ChartId, const Vec& x) const override {
    const double lam = 2.0 / (1.0 + x.squaredNorm());
    return Mat::Identity(2, 2) * (lam * lam);
  }

  Christoffel christoffel(ChartId, const Vec& x) const override {
    return detail::conformal_christoffel(-2.0 * x / (1.0 + x.squaredNorm()));
  }

  double r0(const Point&) const override { return std::numbers::pi / 2.0; }

  bool has_oracle() const override { return true; }

  static Eigen::Vector3d embed(const Point& p) {
    const Vec& u = p.coords;
    const double r2 = u.squaredNorm();
    const double z = (1.0 - r2) / (1.0 + r2);
    return {2.0 * u(0) / (1.0 + r2), 2.0 * u(1) / (1.0 + r2), p.chart == kNorth ? z : -z};
  }

  static Eigen::Matrix<double, 3, 2> embed_jacobian(const Point& p) {
    const Vec& u = p.coords;
    const double s = 1.0 + u.squaredNorm();
    Eigen::Matrix<double, 3, 2> j;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) j(a, b) = (a == b ? 2.0 / s : 0.0) - 4.0 * u(a) * u(b) / (s * s);
    }
    const double sign = p.chart == kNorth ? 1.0 : -1.0;
    for (int b = 0; b < 2; ++b) j(2, b) = sign * (-4.0 * u(b) / (s * s));
    return j;
  }

  static Point unembed(const Eigen::Vector3d& x) {
    const Eigen::Vector3d n = x.normalized();
    if (n.z() >= 0.0) return Point{kNorth, detail::vec2(n.x() / (1.0 + n.z()), n.y() / (1.0 + n.z()))};
    return Point{kSouth, detail::vec2(n.x() / (1.0 - n.z()), n.y() / (1.0 - n.z()))};
  }

  /// Embedded vector of tangent components at p.
  static Eigen::Vector3d embed_tangent(const Point& p, const Vec& v) {
    return embed_jacobian(p) * Eigen::Vector2d(v(0), v(1));
  }

  /// Components at p of an embedded vector tangent at p.
  Vec unembed_tangent(const Point& p, const Eigen::Vector3d& w) const {
    const auto j = embed_jacobian(p);
    const Eigen::Matrix2d g = j.transpose() * j;
    const Eigen::Vector2d c = g.ldlt().solve(j.transpose() * w);
    return detail::vec2(c(0), c(1));
  }

  Point oracle_exp(const Point& p, const Vec& v) const override {
    const Eigen::Vector3d x = embed(p);
    const Eigen::Vector3d w = embed_tangent(p, v);
    const double theta = w.norm();
    if (theta == 0.0) return p;
    return unembed(std::cos(theta) * x + std::sin(theta) * (w / theta));
  }

  Vec oracle_log(const Point& p, const Point& q) const override {
    const Eigen::Vector3d x = embed(p);
    const Eigen::Vector3d y = embed(q);
    const Eigen::Vector3d d = y - x.dot(y) * x;
    const double s = d.norm();
    if (s == 0.0) return Vec::Zero(2);
    const double theta = std::atan2(x.cross(y).norm(), x.dot(y));
    return unembed_tangent(p, d * (theta / s));
  }

  double oracle_dist(const Point& p, const Point& q) const override {
    const Eigen::Vector3d x = embed(p);
    const Eigen::Vector3d y = embed(q);
    return std::atan2(x.cross(y).norm(), x.dot(y));
  }

 private:
  std::vector<ChartSpec> charts_;
};

class PoincareDisk final : public ManifoldModel {
 public:
  explicit PoincareDisk(ModelOptions opts = {}) : opts_(opts) {
    charts_.push_back(ChartSpec{0, "disk", Vec::Zero(2), 1.0,
                                "Poincare disk coordinates |u| < 1, metric 4 |du|^2 / (1 - |u|^2)^2"});
  }

  std::string name() const override { return "hyperbolic2"; }
  std::string description() const override {
    return "hyperbolic plane (curvature -1) in the Poincare disk model";
  }
  int dim() const override { return 2; }
  const std::vector<ChartSpec>& charts() const override { return charts_; }

  // The coordinate boundary |u| = 1 is at infinite distance, so the single
  // chart has no margin band.
  Domain domain_test(ChartId, const Vec& x) const override {
    if (!x.allFinite()) return Domain::outside;
    return x.squaredNorm() < 1.0 ? Domain::inside : Domain::outside;
  }
  Vec change_coords(ChartId, ChartId, const Vec& x) const override { return x; }
  Mat change_jacobian(ChartId, ChartId, const Vec&) const override { return Mat::Identity(2, 2); }

  Mat metric(ChartId, const Vec& x) const override {
    const double lam = 2.0 / (1.0 - x.squaredNorm());
    return Mat::Identity(2, 2) * (lam * lam);
  }
  Christoffel christoffel(ChartId, const Vec& x) const override {
    return detail::conformal_christoffel(2.0 * x / (1.0 - x.squaredNorm()));
  }
  double r0(const Point&) const override { return opts_.r0_cap; }

  bool has_oracle() const override { return true; }

  Point oracle_exp(const Point& p, const Vec& v) const override {
    using C = std::complex<double>;
    const C a(p.coords(0), p.coords(1));
    // Translate p to the origin; the tangent scales by 1 / (1 - |a|^2).
    const C w = C(v(0), v(1)) / (1.0 - std::norm(a));
    const double len = std::abs(w);
    const C z0 = len == 0.0 ? C(0.0) : std::tanh(len) * (w / len);
    const C z = (z0 + a) / (1.0 + std::conj(a) * z0);
    return Point{0, detail::vec2(z.real(), z.imag())};
  }

  Vec oracle_log(const Point& p, const Point& q) const override {
    using C = std::complex<double>;
    const C a(p.coords(0), p.coords(1));
    const C b(q.coords(0), q.coords(1));
    const C z = (b - a) / (1.0 - std::conj(a) * b);
    const double len = std::abs(z);
    const C w = len == 0.0 ? C(0.0) : std::atanh(len) * (z / len);
    const C v = w * (1.0 - std::norm(a));
    return detail::vec2(v.real(), v.imag());
  }

  double oracle_dist(const Point& p, const Point& q) const override {
    using C = std::complex<double>;
    const C a(p.coords(0), p.coords(1));
    const C b(q.coords(0), q.coords(1));
    return 2.0 * std::atanh(std::abs((b - a) / (1.0 - std::conj(a) * b)));
  }

 private:
  ModelOptions opts_;
  std::vector<ChartSpec> charts_;
};

class FlatTorus final : public ManifoldModel {
 public:
  static constexpr double kTrust = std::numbers::pi - 0.5;

  FlatTorus() {
    const double pi = std::numbers::pi;
    const std::array<std::array<double, 2>, 4> centers{{{pi, 0.0}, {0.0, 0.0}, {pi, pi}, {0.0, pi}}};
    const std::array<const char*, 4> names{"A", "B", "C", "D"};
    const std::array<const char*, 4> ranges{"x in (0, 2pi), y in (-pi, pi)", "x in (-pi, pi), y in (-pi, pi)",
                                            "x in (0, 2pi), y in (0, 2pi)", "x in (-pi, pi), y in (0, 2pi)"};
    for (int i = 0; i < 4; ++i) {
      charts_.push_back(ChartSpec{i, names[static_cast<std::size_t>(i)],
                                  detail::vec2(centers[static_cast<std::size_t>(i)][0],
                                               centers[static_cast<std::size_t>(i)][1]),
                                  kTrust, std::string("angle coordinates ") + ranges[static_cast<std::size_t>(i)]});
    }
  }

  std::string name() const override { return "torus2"; }
  std::string description() const override {
    return "flat torus R^2 / (2 pi Z)^2, four overlapping angle charts";
  }
  int dim() const override { return 2; }
  const std::vector<ChartSpec>& charts() const override { return charts_; }

  Domain domain_test(ChartId chart, const Vec& x) const override {
    if (!x.allFinite()) return Domain::outside;
    const double d = (x - center(chart)).cwiseAbs().maxCoeff();
    if (d < kTrust) return Domain::inside;
    if (d < std::numbers::pi) return Domain::margin;
    return Domain::outside;
  }

  Vec change_coords(ChartId from, ChartId to, const Vec& x) const override {
    if (from == to) return x;
    const Vec& c = center(to);
    return detail::vec2(c(0) + detail::wrap_angle(x(0) - c(0)), c(1) + detail::wrap_angle(x(1) - c(1)));
  }
  Mat change_jacobian(ChartId, ChartId, const Vec&) const override { return Mat::Identity(2, 2); }
  Mat metric(ChartId, const Vec&) const override { return Mat::Identity(2, 2); }
  Christoffel christoffel(ChartId, const Vec&) const override { return detail::flat_christoffel(2); }
  /// Half the true injectivity radius pi.
  double r0(const Point&) const override { return std::numbers::pi / 2.0; }

  bool has_oracle() const override { return true; }

  Point oracle_exp(const Point& p, const Vec& v) const override {
    Point raw{p.chart, p.coords + v};
    // The sum may leave p's chart; reduce against the best chart's center.
    ChartId best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (const auto& spec : charts_) {
      const Vec c = change_coords(-1, spec.id, raw.coords);
      const double s = center_score(spec.id, c);
      if (s < best_score) {
        best_score = s;
        best = spec.id;
      }
    }
    return Point{best, change_coords(-1, best, raw.coords)};
  }

  Vec oracle_log(const Point& p, const Point& q) const override {
    return detail::vec2(detail::wrap_angle(q.coords(0) - p.coords(0)),
                        detail::wrap_angle(q.coords(1) - p.coords(1)));
  }

  double oracle_dist(const Point& p, const Point& q) const override { return oracle_log(p, q).norm(); }

 private:
  const Vec& center(ChartId chart) const { return charts_.at(static_cast<std::size_t>(chart)).center; }
  std::vector<ChartSpec> charts_;
};

/// Forwards everything except the closed-form oracles; used to exercise the
/// shooting-based exponential map.
class OracleFreeView final : public ManifoldModel {
 public:
  explicit OracleFreeView(const ManifoldModel& inner) : inner_(inner) {}

  std::string name() const override { return inner_.name(); }
  std::string description() const override { return inner_.description() + " (oracle hidden)"; }
  int dim() const override { return inner_.dim(); }
  const std::vector<ChartSpec>& charts() const override { return inner_.charts(); }
  Domain domain_test(ChartId c, const Vec& x) const override { return inner_.domain_test(c, x); }
  Vec change_coords(ChartId a, ChartId b, const Vec& x) const override { return inner_.change_coords(a, b, x); }
  Mat change_jacobian(ChartId a, ChartId b, const Vec& x) const override {
    return inner_.change_jacobian(a, b, x);
  }
  Mat metric(ChartId c, const Vec& x) const override { return inner_.metric(c, x); }
  Christoffel christoffel(ChartId c, const Vec& x) const override { return inner_.christoffel(c, x); }
  double r0(const Point& p) const override { return inner_.r0(p); }
  double center_score(ChartId c, const Vec& x) const override { return inner_.center_score(c, x); }

 private:
  const ManifoldModel& inner_;
};

/// Runs the metric-compatibility residual at a fixed set of coordinates in
/// every chart; throws std::logic_error when the connection is not compatible.
inline void validate_connection(const ManifoldModel& model, double tol = 1e-6) {
  const std::array<std::array<double, 2>, 5> probes{{{0.0, 0.0}, {0.3, -0.2}, {-0.5, 0.4}, {0.1, 0.6}, {-0.45, -0.35}}};
  for (const auto& spec : model.charts()) {
    for (const auto& pr : probes) {
      Vec x = spec.center;
      x(0) += pr[0];
      x(1) += pr[1];
      if (model.domain_test(spec.id, x) == Domain::outside) continue;
      const double r = metric_compatibility_residual(model, spec.id, x);
      if (!(r < tol)) {
        throw std::logic_error(model.name() + ": connection is not metric-compatible (residual " +
                               std::to_string(r) + ")");
      }
    }
  }
}

/// Registered model names, sorted.
inline std::vector<std::string> model_names() { return {"euclidean2", "hyperbolic2", "sphere2", "torus2"}; }

inline std::unique_ptr<ManifoldModel> make_model(std::string_view name, ModelOptions opts = {}) {
  std::unique_ptr<ManifoldModel> model;
  if (name == "euclidean2") model = std::make_unique<EuclideanPlane>(opts);
  else if (name == "sphere2") model = std::make_unique<UnitSphere>();
  else if (name == "hyperbolic2") model = std::make_unique<PoincareDisk>(opts);
  else if (name == "torus2") model = std::make_unique<FlatTorus>();
  else throw ValidationError("unknown manifold '" + std::string(name) + "'");
  validate_connection(*model);
  return model;
}

}  // namespace pathlin
