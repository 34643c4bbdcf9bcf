#pragma once

// Shared numerical kernels: grids, finite-difference stencils, fixed-step
// RK4 with Hermite dense output, and least-squares polynomial fitting in
// the Bernstein or monomial basis.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pathlin/errors.hpp"

namespace pathlin {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Grid {
 public:
  Grid() = default;

  /// n intervals, n + 1 nodes.
  static Grid uniform(double start, double end, std::size_t n) {
    if (n < 1) throw ValidationError("grid needs at least one interval");
    if (!(end > start)) throw ValidationError("grid end must exceed start");
    Grid g;
    g.nodes_.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
      // Exact endpoints, no accumulated drift.
      g.nodes_[j] = start + (end - start) * static_cast<double>(j) / static_cast<double>(n);
    }
    g.nodes_[n] = end;
    g.uniform_ = true;
    return g;
  }

  static Grid from_nodes(std::vector<double> nodes) {
    if (nodes.size() < 2) throw ValidationError("grid needs at least two nodes");
    for (std::size_t j = 1; j < nodes.size(); ++j) {
      if (!(nodes[j] > nodes[j - 1])) throw ValidationError("grid nodes must be strictly increasing");
    }
    Grid g;
    g.nodes_ = std::move(nodes);
    const double h = (g.nodes_.back() - g.nodes_.front()) / static_cast<double>(g.nodes_.size() - 1);
    g.uniform_ = true;
    for (std::size_t j = 1; j < g.nodes_.size(); ++j) {
      if (std::abs((g.nodes_[j] - g.nodes_[j - 1]) - h) > 1e-12 * h) {
        g.uniform_ = false;
        break;
      }
    }
    return g;
  }

  std::size_t intervals() const { return nodes_.size() - 1; }
  std::size_t size() const { return nodes_.size(); }
  double operator[](std::size_t j) const { return nodes_[j]; }
  double start() const { return nodes_.front(); }
  double end() const { return nodes_.back(); }
  bool is_uniform() const { return uniform_; }
  double step() const { return (end() - start()) / static_cast<double>(intervals()); }
  const std::vector<double>& nodes() const { return nodes_; }

  /// Interval index j with t in [t_j, t_{j+1}]; clamps to the span.
  std::size_t locate(double t) const {
    if (t <= nodes_.front()) return 0;
    if (t >= nodes_.back()) return intervals() - 1;
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
  }

  /// Node index if t coincides with a node (relative tolerance), else npos.
  std::size_t node_at(double t, double rel_tol = 1e-12) const {
    const double tol = rel_tol * std::max(1.0, end() - start());
    const std::size_t j = locate(t);
    if (std::abs(nodes_[j] - t) <= tol) return j;
    if (std::abs(nodes_[j + 1] - t) <= tol) return j + 1;
    return npos;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<double> nodes_;
  bool uniform_ = false;
};

// ---------------------------------------------------------------------------
// Finite differences

/// Fornberg's recursion: weights w_i such that sum w_i f(x0 + offsets_i)
/// approximates the `order`-th derivative at x0 (offsets in absolute units).
inline std::vector<double> fd_weights(const std::vector<double>& offsets, int order) {
  const std::size_t n = offsets.size();
  if (static_cast<int>(n) <= order) throw std::invalid_argument("stencil too small for derivative order");
  std::vector<std::vector<double>> c(n, std::vector<double>(static_cast<std::size_t>(order) + 1, 0.0));
  double c1 = 1.0;
  double c4 = offsets[0];
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min(static_cast<int>(i), order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = offsets[i];
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = offsets[i] - offsets[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][static_cast<std::size_t>(order)];
  return w;
}

struct Stencil {
  std::vector<std::size_t> nodes;
  std::vector<double> weights;
};

/// Stencil for the `order`-th derivative at node j of a uniform grid with
/// n_nodes nodes and spacing h, using order + accuracy points: centered where
/// it fits, shifted toward the interior near the ends.
inline Stencil stencil_at(std::size_t n_nodes, std::size_t j, double h, int order = 1, int accuracy = 4) {
  const auto width = static_cast<std::size_t>(order + accuracy);
  if (width > n_nodes) throw GridTooCoarse("need at least " + std::to_string(width) + " nodes");
  const std::size_t half = width / 2;
  std::size_t lo = j >= half ? j - half : 0;
  if (lo + width > n_nodes) lo = n_nodes - width;
  Stencil s;
  std::vector<double> offsets;
  for (std::size_t i = 0; i < width; ++i) {
    s.nodes.push_back(lo + i);
    offsets.push_back((static_cast<double>(lo + i) - static_cast<double>(j)) * h);
  }
  s.weights = fd_weights(offsets, order);
  return s;
}

/// One-sided stencil at node j using only nodes on one side (forward if
/// `forward`), order + accuracy points.
inline Stencil one_sided_stencil(std::size_t n_nodes, std::size_t j, double h, int order, int accuracy,
                                 bool forward) {
  const auto width = static_cast<std::size_t>(order + accuracy);
  Stencil s;
  std::vector<double> offsets;
  for (std::size_t i = 0; i < width; ++i) {
    if (forward) {
      if (j + i >= n_nodes) throw GridTooCoarse("one-sided stencil runs past the grid end");
      s.nodes.push_back(j + i);
      offsets.push_back(static_cast<double>(i) * h);
    } else {
      if (i > j) throw GridTooCoarse("one-sided stencil runs past the grid start");
      s.nodes.push_back(j - i);
      offsets.push_back(-static_cast<double>(i) * h);
    }
  }
  s.weights = fd_weights(offsets, order);
  return s;
}

inline void require_differentiable(const Grid& grid) {
  if (!grid.is_uniform()) throw ValidationError("finite differences need a uniform grid");
  if (grid.intervals() < 4) throw GridTooCoarse("need N >= 4 intervals, got " + std::to_string(grid.intervals()));
}

/// First derivative per node: five-point fourth-order stencils, central in the
/// interior, shifted at the two boundary bands. Exact for degree <= 4.
inline std::vector<Vec> differentiate(const std::vector<Vec>& values, const Grid& grid, int order = 1) {
  if (order < 1) throw std::invalid_argument("derivative order must be >= 1");
  require_differentiable(grid);
  if (values.size() != grid.size()) throw ValidationError("values and grid differ in length");
  std::vector<Vec> out(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    const Stencil s = stencil_at(grid.size(), j, grid.step(), order);
    Vec d = Vec::Zero(values[j].size());
    // weights sum to zero, so differences from the center lose less to rounding
    for (std::size_t i = 0; i < s.nodes.size(); ++i) d += s.weights[i] * (values[s.nodes[i]] - values[j]);
    out[j] = std::move(d);
  }
  return out;
}

/// Cumulative trapezoid integral, zero at the first node.
inline std::vector<Vec> cumulative_trapezoid(const std::vector<Vec>& values, const Grid& grid) {
  std::vector<Vec> out(values.size());
  out[0] = Vec::Zero(values[0].size());
  for (std::size_t j = 1; j < values.size(); ++j) {
    out[j] = out[j - 1] + 0.5 * (grid[j] - grid[j - 1]) * (values[j] + values[j - 1]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cubic Hermite

struct Hermite {
  double t0, t1;
  Vec y0, y1, d0, d1;

  Vec value(double t) const {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
           (s3 - s2) * h * d1;
  }

  Vec derivative(double t) const {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * y0 + (6 * s - 6 * s2) * y1) / h + (3 * s2 - 4 * s + 1) * d0 + (3 * s2 - 2 * s) * d1;
  }

  /// Exact integral of the cubic from t0 to t.
  Vec integral(double t) const {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    return h * ((s4 / 2 - s3 + s) * y0 + (s4 / 4 - 2 * s3 / 3 + s2 / 2) * h * d0 + (-s4 / 2 + s3) * y1 +
                (s4 / 4 - s3 / 3) * h * d1);
  }
};

// ---------------------------------------------------------------------------
// Runge-Kutta

inline void check_finite(const Vec& y, double t) {
  if (!y.allFinite()) throw NonFiniteState("state became non-finite near t = " + std::to_string(t));
}

/// One classical RK4 step of size h (h may be negative).
template <class Rhs>
Vec rk4_step(Rhs&& f, double t, const Vec& y, double h) {
  const Vec k1 = f(t, y);
  const Vec k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const Vec k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const Vec k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Advance from t0 to t1 in `substeps` equal RK4 steps.
template <class Rhs>
Vec rk4_advance(Rhs&& f, double t0, double t1, Vec y, int substeps) {
  const double h = (t1 - t0) / substeps;
  for (int s = 0; s < substeps; ++s) {
    const double t = t0 + h * s;
    y = rk4_step(f, t, y, h);
    check_finite(y, t + h);
  }
  return y;
}

/// Integrated states at the grid nodes plus the right-hand side there, which
/// is all a cubic Hermite dense output needs.
struct Trajectory {
  Grid grid;
  std::vector<Vec> states;
  std::vector<Vec> slopes;

  Vec operator()(double t) const {
    const std::size_t j = grid.locate(t);
    return Hermite{grid[j], grid[j + 1], states[j], states[j + 1], slopes[j], slopes[j + 1]}.value(t);
  }
};

/// Fixed-step RK4 over every grid interval, `substeps` steps per interval.
/// trajectory.states[0] == y0 exactly.
template <class Rhs>
Trajectory integrate(Rhs&& f, const Vec& y0, const Grid& grid, int substeps = 2) {
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  check_finite(y0, grid.start());
  Trajectory tr;
  tr.grid = grid;
  tr.states.reserve(grid.size());
  tr.slopes.reserve(grid.size());
  tr.states.push_back(y0);
  for (std::size_t j = 0; j < grid.intervals(); ++j) {
    tr.slopes.push_back(f(grid[j], tr.states[j]));
    tr.states.push_back(rk4_advance(f, grid[j], grid[j + 1], tr.states[j], substeps));
  }
  tr.slopes.push_back(f(grid.end(), tr.states.back()));
  return tr;
}

// ---------------------------------------------------------------------------
// Polynomials

enum class Basis { bernstein, monomial };

inline const char* to_string(Basis b) { return b == Basis::bernstein ? "bernstein" : "monomial"; }

/// Bernstein polynomials live on u = (t - lo) / (hi - lo); monomials are in t.
struct PolyCoeffs {
  Basis basis = Basis::bernstein;
  int degree = 0;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<Vec> coeffs;
};

/// Values of the d + 1 basis functions at t.
inline Vec basis_values(Basis basis, int degree, double lo, double hi, double t) {
  Vec b(degree + 1);
  if (basis == Basis::monomial) {
    double p = 1.0;
    for (int k = 0; k <= degree; ++k, p *= t) b(k) = p;
    return b;
  }
  const double u = (t - lo) / (hi - lo);
  // Triangle recursion, stable on [0, 1].
  b.setZero();
  b(0) = 1.0;
  for (int n = 1; n <= degree; ++n) {
    for (int k = n; k >= 1; --k) b(k) = (1.0 - u) * b(k) + u * b(k - 1);
    b(0) *= (1.0 - u);
  }
  return b;
}

inline Vec eval_poly(const PolyCoeffs& p, double t) {
  if (static_cast<int>(p.coeffs.size()) != p.degree + 1) throw ValidationError("coefficient count must be degree + 1");
  const Vec b = basis_values(p.basis, p.degree, p.lo, p.hi, t);
  Vec out = Vec::Zero(p.coeffs.front().size());
  for (int k = 0; k <= p.degree; ++k) out += b(k) * p.coeffs[static_cast<std::size_t>(k)];
  return out;
}

inline std::vector<Vec> eval_poly(const PolyCoeffs& p, const Grid& grid) {
  std::vector<Vec> out;
  out.reserve(grid.size());
  for (double t : grid.nodes()) out.push_back(eval_poly(p, t));
  return out;
}

/// Trapezoid weights; the discrete L2 inner product used by fit_poly.
inline Vec quadrature_weights(const Grid& grid) {
  Vec w = Vec::Zero(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    const double h = grid[j + 1] - grid[j];
    w(static_cast<Eigen::Index>(j)) += 0.5 * h;
    w(static_cast<Eigen::Index>(j + 1)) += 0.5 * h;
  }
  return w;
}

inline Mat design_matrix(Basis basis, int degree, double lo, double hi, const Grid& grid) {
  Mat a(static_cast<Eigen::Index>(grid.size()), degree + 1);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    a.row(static_cast<Eigen::Index>(j)) = basis_values(basis, degree, lo, hi, grid[j]).transpose();
  }
  return a;
}

inline constexpr double kMaxNormalCondition = 1e12;

/// Weighted least squares in the grid's discrete L2 inner product.
inline PolyCoeffs fit_poly(const std::vector<Vec>& values, const Grid& grid, int degree,
                           Basis basis = Basis::bernstein) {
  if (degree < 0) throw ValidationError("degree must be >= 0");
  if (values.size() != grid.size()) throw ValidationError("values and grid differ in length");
  if (static_cast<std::size_t>(degree) + 1 > grid.size()) throw ValidationError("degree + 1 exceeds node count");
  const Vec sw = quadrature_weights(grid).cwiseSqrt();
  const Mat a = sw.asDiagonal() * design_matrix(basis, degree, grid.start(), grid.end(), grid);

  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& sv = svd.singularValues();
  const double cond = sv(0) / sv(sv.size() - 1);
  if (!(cond * cond <= kMaxNormalCondition)) {
    throw IllConditioned("normal-equation condition estimate " + std::to_string(cond * cond) + " exceeds 1e12");
  }
  const auto m = values.front().size();
  Mat y(static_cast<Eigen::Index>(values.size()), m);
  for (std::size_t j = 0; j < values.size(); ++j) y.row(static_cast<Eigen::Index>(j)) = values[j].transpose();
  const Mat c = a.colPivHouseholderQr().solve(sw.asDiagonal() * y);

  PolyCoeffs p{basis, degree, grid.start(), grid.end(), {}};
  for (int k = 0; k <= degree; ++k) p.coeffs.push_back(c.row(k).transpose());
  return p;
}

/// sqrt(sum_j w_j |a_j - b_j|^2) with trapezoid weights.
inline double weighted_l2_distance(const std::vector<Vec>& a, const std::vector<Vec>& b, const Grid& grid) {
  const Vec w = quadrature_weights(grid);
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += w(static_cast<Eigen::Index>(j)) * (a[j] - b[j]).squaredNorm();
  return std::sqrt(s);
}

/// Coefficients of the same polynomial in the monomial basis of t.
inline std::vector<Vec> to_monomial(const PolyCoeffs& p) {
  if (p.basis == Basis::monomial) return p.coeffs;
  // B_k^d(u) = C(d,k) u^k (1-u)^(d-k), u = (t - lo) / s with s = hi - lo.
  const int d = p.degree;
  const auto m = p.coeffs.front().size();
  std::vector<Vec> in_u(static_cast<std::size_t>(d) + 1, Vec::Zero(m));
  auto binom = [](int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  for (int k = 0; k <= d; ++k) {
    for (int i = 0; i <= d - k; ++i) {
      const double c = binom(d, k) * binom(d - k, i) * ((i % 2) ? -1.0 : 1.0);
      in_u[static_cast<std::size_t>(k + i)] += c * p.coeffs[static_cast<std::size_t>(k)];
    }
  }
  // Substitute u = (t - lo) / s.
  const double s = p.hi - p.lo;
  std::vector<Vec> in_t(static_cast<std::size_t>(d) + 1, Vec::Zero(m));
  for (int n = 0; n <= d; ++n) {
    const double scale = std::pow(1.0 / s, n);
    for (int i = 0; i <= n; ++i) {
      in_t[static_cast<std::size_t>(i)] +=
          binom(n, i) * std::pow(-p.lo, n - i) * scale * in_u[static_cast<std::size_t>(n)];
    }
  }
  return in_t;
}

}  // namespace pathlin
