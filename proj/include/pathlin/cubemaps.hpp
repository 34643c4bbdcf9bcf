#pragma once

// Two-parameter maps alpha: [-1,1]^2 -> M based at alpha(0,0) = p.
//
// Forward:  v1(s1)     = P^{s1->0} d/ds1 alpha(s1, 0)
//           v2(s1, s2) = P1^{s1->0} P2^{s2->0} d/ds2 alpha(s1, s2)
// Inverse:  gamma1 = P^-1(v1), then for every s1 the s2-line is P^-1 of v2(s1, .)
//           started at gamma1(s1) in the frame transported along gamma1.
//
// Transporting along an s2-line from the frame that frame0 becomes at
// gamma1(s1) yields frame0 components directly, so both directions reduce to
// one-dimensional linearizations per grid line.

#include <cstddef>
#include <vector>

#include "pathlin/linearize.hpp"

namespace pathlin {

struct CubeSample {
  Grid grid1;
  Grid grid2;
  /// points[i][j] = alpha(grid1[i], grid2[j]).
  std::vector<std::vector<Point>> points;
  std::size_t base1 = 0;
  std::size_t base2 = 0;
  int order = 3;

  const Point& base() const { return points.at(base1).at(base2); }

  SampledCurve line1(std::size_t j) const {
    SampledCurve c{grid1, {}, order, base1};
    for (const auto& row : points) c.points.push_back(row.at(j));
    return c;
  }

  SampledCurve line2(std::size_t i) const { return SampledCurve{grid2, points.at(i), order, base2}; }
};

struct CubeLinearization {
  TangentCurve v1;
  Point base;
  Frame frame0;
  Grid grid2;
  std::size_t base2 = 0;
  /// v2[i][j] = frame0 components of v2(grid1[i], grid2[j]).
  std::vector<std::vector<Vec>> v2;
};

inline void validate_cube(const ManifoldModel& model, const CubeSample& alpha) {
  if (alpha.points.size() != alpha.grid1.size()) throw ValidationError("cube rows do not match grid1");
  for (const auto& row : alpha.points) {
    if (row.size() != alpha.grid2.size()) throw ValidationError("cube columns do not match grid2");
  }
  if (alpha.base1 >= alpha.grid1.size() || alpha.base2 >= alpha.grid2.size()) {
    throw ValidationError("cube base indices out of range");
  }
  (void)model;
}

inline CubeLinearization p2_forward(const ManifoldModel& model, const CubeSample& alpha, const Frame& frame0,
                                    const TransportOptions& opts = {}) {
  validate_cube(model, alpha);
  const LinearizationReport first = p_forward(model, alpha.line1(alpha.base2), frame0, opts);
  CubeLinearization lin;
  lin.v1 = first.tangent_curve;
  lin.base = alpha.base();
  lin.frame0 = frame0;
  lin.grid2 = alpha.grid2;
  lin.base2 = alpha.base2;
  lin.v2.resize(alpha.grid1.size());
  for (std::size_t i = 0; i < alpha.grid1.size(); ++i) {
    // frame0 transported to alpha(s1_i, 0) along the s1-line.
    const Frame& start = first.frames.frames[i];
    lin.v2[i] = p_forward(model, alpha.line2(i), start, opts).tangent_curve.components;
  }
  return lin;
}

inline CubeLinearization p2_forward(const ManifoldModel& model, const CubeSample& alpha,
                                    const TransportOptions& opts = {}) {
  return p2_forward(model, alpha, orthonormal_frame(model, alpha.base()), opts);
}

inline CubeSample p2_inverse(const ManifoldModel& model, const CubeLinearization& lin,
                             const TransportOptions& opts = {}) {
  if (lin.v2.size() != lin.v1.grid.size()) throw ValidationError("v2 rows do not match the v1 grid");
  const InverseResult first = p_inverse(model, lin.v1, opts);
  CubeSample alpha;
  alpha.grid1 = lin.v1.grid;
  alpha.grid2 = lin.grid2;
  alpha.base1 = lin.v1.base_index;
  alpha.base2 = lin.base2;
  alpha.order = first.curve.order;
  alpha.points.resize(alpha.grid1.size());
  for (std::size_t i = 0; i < alpha.grid1.size(); ++i) {
    if (lin.v2[i].size() != lin.grid2.size()) throw ValidationError("v2 row length does not match grid2");
    TangentCurve line;
    line.frame0 = first.frames.frames[i];
    line.base = line.frame0.base;
    line.grid = lin.grid2;
    line.base_index = lin.base2;
    line.order = lin.v1.order;
    line.components = lin.v2[i];
    alpha.points[i] = p_inverse(model, line, opts).curve.points;
  }
  return alpha;
}

/// Largest pointwise distance between two cube samples on the same grids.
inline double max_cube_distance(const ManifoldModel& model, const CubeSample& a, const CubeSample& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    for (std::size_t j = 0; j < a.points[i].size(); ++j) {
      worst = std::max(worst, point_distance(model, a.points[i][j], b.points[i][j]));
    }
  }
  return worst;
}

/// Largest component difference between two cube linearizations (v1 and v2).
inline double max_linearization_difference(const CubeLinearization& a, const CubeLinearization& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.v1.components.size(); ++i) {
    worst = std::max(worst, (a.v1.components[i] - b.v1.components[i]).norm());
    for (std::size_t j = 0; j < a.v2[i].size(); ++j) worst = std::max(worst, (a.v2[i][j] - b.v2[i][j]).norm());
  }
  return worst;
}

}  // namespace pathlin
