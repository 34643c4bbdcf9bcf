#pragma once

// Seeded sample generators: random points, random polynomial tangent curves
// and the smooth curves they synthesize. Uniform variates are drawn straight
// from mt19937_64 bits so that sequences are identical across standard
// libraries.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "pathlin/linearize.hpp"
#include "pathlin/models.hpp"

namespace pathlin {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

/// A random point in the model's "comfortable" region.
inline Point random_point(const ManifoldModel& model, Rng& rng) {
  const auto name = model.name();
  if (name == "sphere2") {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double s = std::sqrt(1.0 - z * z);
    return UnitSphere::unembed(Eigen::Vector3d(s * std::cos(phi), s * std::sin(phi), z));
  }
  if (name == "hyperbolic2") {
    const double r = 0.5 * std::sqrt(rng.uniform());
    const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return Point{0, detail::vec2(r * std::cos(a), r * std::sin(a))};
  }
  if (name == "torus2") {
    const double two_pi = 2.0 * std::numbers::pi;
    Point p{1, detail::vec2(detail::wrap_angle(rng.uniform(0.0, two_pi)), detail::wrap_angle(rng.uniform(0.0, two_pi)))};
    return rechart(model, p);
  }
  const auto& c = model.charts().front();
  Vec x = c.center;
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += rng.uniform(-1.0, 1.0);
  return Point{c.id, x};
}

/// Monomial coefficients of a random polynomial of the given degree, entries
/// uniform in [-scale, scale].
inline PolyCoeffs random_poly(int dim, int degree, double scale, Rng& rng, double lo = 0.0, double hi = 1.0) {
  PolyCoeffs p{Basis::monomial, degree, lo, hi, {}};
  for (int k = 0; k <= degree; ++k) {
    Vec c(dim);
    for (int i = 0; i < dim; ++i) c(i) = rng.uniform(-scale, scale);
    p.coeffs.push_back(c);
  }
  return p;
}

inline TangentCurve tangent_curve_from_poly(const ManifoldModel& model, const Point& base, const Frame& frame0,
                                            const PolyCoeffs& poly, const Grid& grid, std::size_t base_index = 0) {
  TangentCurve v;
  v.base = base;
  v.frame0 = frame0;
  v.grid = grid;
  v.base_index = base_index;
  v.components = eval_poly(poly, grid);
  (void)model;
  return v;
}

/// p_inverse of the polynomial on a grid `refine` times finer, then sampled
/// back onto `grid`; the result carries much less integration error than a
/// solve on `grid` itself.
inline SampledCurve synthesize_curve(const ManifoldModel& model, const Point& base, const Frame& frame0,
                                     const PolyCoeffs& poly, const Grid& grid, std::size_t base_index = 0,
                                     int refine = 8) {
  const std::size_t n = grid.intervals();
  const Grid fine = Grid::uniform(grid.start(), grid.end(), n * static_cast<std::size_t>(refine));
  const std::size_t fine_base = base_index * static_cast<std::size_t>(refine);
  const InverseResult r = p_inverse(model, tangent_curve_from_poly(model, base, frame0, poly, fine, fine_base));
  SampledCurve c;
  c.grid = grid;
  c.base_index = base_index;
  c.order = 4;
  for (std::size_t j = 0; j <= n; ++j) c.points.push_back(r.curve.points[j * static_cast<std::size_t>(refine)]);
  return c;
}

/// Per-model speed scale that keeps random curves well inside the geometry.
inline double comfortable_speed(const ManifoldModel& model) {
  return model.name() == "hyperbolic2" ? 0.6 : 1.0;
}

struct RandomCurve {
  Point base;
  PolyCoeffs poly;
  SampledCurve curve;
};

/// Seeded smooth curve on [0, 1] built from a polynomial tangent curve of degree <= 3.
inline RandomCurve random_smooth_curve(const ManifoldModel& model, Rng& rng, std::size_t n, int degree = 3) {
  RandomCurve rc;
  rc.base = random_point(model, rng);
  rc.poly = random_poly(model.dim(), degree, comfortable_speed(model), rng);
  const Frame f0 = orthonormal_frame(model, rc.base);
  rc.curve = synthesize_curve(model, rc.base, f0, rc.poly, Grid::uniform(0.0, 1.0, n));
  return rc;
}

/// Closed-form curve on the unit sphere in polar angles, a slow drift plus
/// two sinusoidal wobbles; colatitude stays within [0.55, 1.75] so it never
/// nears a pole. Needs a model with embedded coordinates (sphere2).
inline SampledCurve wiggly_sphere_curve(Rng& rng, std::size_t n) {
  const double th0 = rng.uniform(0.9, 1.4);
  const double ph0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double a1 = rng.uniform(0.1, 0.2), w1 = rng.uniform(5.0, 7.0), c1 = rng.uniform(0.0, 6.0);
  const double a2 = rng.uniform(0.1, 0.2), w2 = rng.uniform(6.0, 9.0), c2 = rng.uniform(0.0, 6.0);
  SampledCurve c;
  c.grid = Grid::uniform(0.0, 1.0, n);
  c.order = 6;
  for (std::size_t j = 0; j <= n; ++j) {
    const double t = c.grid[j];
    const double th = th0 + 0.3 * t + a1 * (std::sin(w1 * t + c1) - std::sin(c1));
    const double ph = ph0 + 1.2 * t + a2 * (std::sin(w2 * t + c2) - std::sin(c2));
    c.points.push_back(UnitSphere::unembed(
        Eigen::Vector3d(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th))));
  }
  return c;
}

/// Great circle X(t) = (sin(s t), 0, cos(s t)) from the north pole toward +x.
inline SampledCurve sphere_great_circle(double speed, std::size_t n, double t0 = 0.0, double t1 = 1.0) {
  SampledCurve c;
  c.grid = Grid::uniform(t0, t1, n);
  c.order = 6;
  for (std::size_t j = 0; j <= n; ++j) {
    const double a = speed * c.grid[j];
    c.points.push_back(UnitSphere::unembed(Eigen::Vector3d(std::sin(a), 0.0, std::cos(a))));
  }
  return c;
}

/// Curve with g-speed in [0.4, 1.6]: tangent curve w + small cubic, |w| = 1.
inline RandomCurve random_immersed_curve(const ManifoldModel& model, Rng& rng, std::size_t n) {
  RandomCurve rc;
  rc.base = random_point(model, rng);
  rc.poly = random_poly(model.dim(), 3, 0.1, rng);
  const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
  rc.poly.coeffs[0] += detail::vec2(std::cos(a), std::sin(a));
  const Frame f0 = orthonormal_frame(model, rc.base);
  rc.curve = synthesize_curve(model, rc.base, f0, rc.poly, Grid::uniform(0.0, 1.0, n));
  return rc;
}

}  // namespace pathlin
