#include <cmath>
#include <numbers>

#include "common.hpp"

using namespace pathlin;
using testutil::pt;
using testutil::v2;

namespace {

constexpr double kPi = std::numbers::pi;

TangentCurve constant_tc(const ManifoldModel& m, const Point& p, const Vec& w, const Grid& g, std::size_t base = 0) {
  TangentCurve v;
  v.base = p;
  v.frame0 = orthonormal_frame(m, p);
  v.grid = g;
  v.base_index = base;
  v.components.assign(g.size(), w);
  return v;
}

SampledCurve from_function(const Grid& g, const Point& p, Vec (*f)(double)) {
  SampledCurve c;
  c.grid = g;
  for (double t : g.nodes()) c.points.push_back(Point{p.chart, p.coords + f(t)});
  return c;
}

}  // namespace

TEST(Forward, EuclideanLineIsConstant) {
  const auto e = make_model("euclidean2");
  SampledCurve c;
  c.grid = Grid::uniform(0.0, 1.0, 40);
  for (double t : c.grid.nodes()) c.points.push_back(pt(0, 0.5 + 0.3 * t, -0.2 + 0.4 * t));
  const auto rep = p_forward(*e, c);
  for (const auto& v : rep.tangent_curve.components) EXPECT_LT((v - v2(0.3, 0.4)).norm(), 1e-12);
  EXPECT_LT(rep.norm_drift, 1e-12);
}

TEST(Forward, UnitGreatCircleIsConstantUnit) {
  const auto s = make_model("sphere2");
  const auto rep = p_forward(*s, sphere_great_circle(1.0, 400));
  for (const auto& v : rep.tangent_curve.components) EXPECT_LT((v - v2(1, 0)).norm(), 1e-6);
  EXPECT_LT(rep.norm_drift, 1e-6);
}

TEST(Forward, InitialValueIsVelocityInFrame) {
  const auto s = make_model("sphere2");
  Rng rng(21);
  const SampledCurve c = wiggly_sphere_curve(rng, 200);
  const Frame f0{c.base(), (Mat(2, 2) << 0.3, -0.1, 0.2, 0.5).finished()};
  const CurveTrack tr = track_curve(*s, c);
  const auto rep = p_forward(*s, c, tr, f0);
  const Vec expect = push_frame(*s, f0, tr.node_chart[0]).columns.partialPivLu().solve(tr.velocity[0]);
  EXPECT_LT((rep.tangent_curve.components[0] - expect).norm(), 1e-12);
}

TEST(Inverse, ZeroFieldIsConstantCurve) {
  const auto h = make_model("hyperbolic2");
  const Point p = pt(0, 0.2, -0.3);
  const auto r = p_inverse(*h, constant_tc(*h, p, v2(0, 0), Grid::uniform(0, 1, 20)));
  for (const auto& q : r.curve.points) EXPECT_LT(dist_oracle(*h, p, q), 1e-15);
}

TEST(Inverse, ConstantFieldFollowsOracleGeodesic) {
  Rng rng(4);
  for (const char* name : {"sphere2", "hyperbolic2"}) {
    const auto m = make_model(name);
    for (int k = 0; k < 5; ++k) {
      const Point p = random_point(*m, rng);
      const double a = rng.uniform(0.0, 2 * kPi);
      const Vec w = (kPi / 2) * v2(std::cos(a), std::sin(a));
      const auto v = constant_tc(*m, p, w, Grid::uniform(0, 1, 400));
      const Point end = p_inverse(*m, v).curve.points.back();
      const Point expect = exp_oracle(*m, p, Tangent{p, v.frame0.columns * w});
      EXPECT_LT(dist_oracle(*m, end, expect), 1e-6) << name;
    }
  }
}

TEST(Inverse, EuclideanParabola) {
  const auto e = make_model("euclidean2");
  TangentCurve v = constant_tc(*e, pt(0, 1, 2), v2(0, 0), Grid::uniform(0, 1, 50));
  for (std::size_t j = 0; j < v.grid.size(); ++j) v.components[j] = v2(1, 2 * v.grid[j]);
  const auto r = p_inverse(*e, v);
  for (std::size_t j = 0; j < v.grid.size(); ++j) {
    const double t = v.grid[j];
    EXPECT_LT((r.curve.points[j].coords - v2(1 + t, 2 + t * t)).norm(), 1e-12);
  }
}

TEST(Inverse, RunawayInDiskIsNumericalError) {
  const auto h = make_model("hyperbolic2");
  const auto v = constant_tc(*h, pt(0, 0, 0), v2(4000, 0), Grid::uniform(0, 1, 50));
  try {
    p_inverse(*h, v);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_FALSE(e.is_validation()) << e.what();
  }
}

TEST(Roundtrip, EuclideanSineCurve) {
  const auto e = make_model("euclidean2");
  const SampledCurve c =
      from_function(Grid::uniform(0, 1, 200), pt(0, 0.1, 0.2), [](double t) { return v2(std::sin(t), t * t); });
  EXPECT_LT(roundtrip_check(*e, c).max_distance, 1e-8);
}

TEST(Independence, BasisChangeOnGreatCircle) {
  const auto s = make_model("sphere2");
  const SampledCurve c = sphere_great_circle(1.0, 400);
  const Frame a = orthonormal_frame(*s, c.base());
  const double th = 0.7;
  const Mat rot = (Mat(2, 2) << std::cos(th), -std::sin(th), std::sin(th), std::cos(th)).finished();
  const Frame b{a.base, a.columns * rot};
  EXPECT_LT(basis_independence_check(*s, c, a, b), 1e-7);
}

TEST(Independence, StartChartOnSphere) {
  const auto s = make_model("sphere2");
  Rng rng(8);
  const SampledCurve c = wiggly_sphere_curve(rng, 400);
  EXPECT_LT(chart_independence_check(*s, c, UnitSphere::kNorth, UnitSphere::kSouth), 1e-6);
}

TEST(Rescale, IdentityAndEuclideanLine) {
  const auto e = make_model("euclidean2");
  const Vec w = v2(0.4, -0.3);
  const auto v = constant_tc(*e, pt(0, 0, 0), w, Grid::uniform(-2, 2, 40), 20);
  const auto same = rescale_to_unit(v, 1.0);
  EXPECT_EQ(same.grid.nodes(), v.grid.nodes());
  const auto u = rescale_to_unit(v, 2.0);
  EXPECT_DOUBLE_EQ(u.grid.start(), -1.0);
  EXPECT_DOUBLE_EQ(u.grid.end(), 1.0);
  for (const auto& c : u.components) EXPECT_LT((c - 2 * w).norm(), 1e-15);
  const auto a = p_inverse(*e, v).curve.points;
  const auto b = p_inverse(*e, u).curve.points;
  EXPECT_LT((a.front().coords - b.front().coords).norm(), 1e-12);
  EXPECT_LT((a.back().coords - b.back().coords).norm(), 1e-12);
  EXPECT_THROW(rescale_to_unit(v, 0.0), ValidationError);
}

TEST(Rescale, SphereHalfGreatCircle) {
  const auto s = make_model("sphere2");
  const Point p = UnitSphere::unembed(Eigen::Vector3d(1, 0, 0));
  const auto v = constant_tc(*s, p, v2(1, 0), Grid::uniform(-kPi, kPi, 800), 400);
  const auto u = rescale_to_unit(v, kPi);
  const auto a = p_inverse(*s, v).curve.points;
  const auto b = p_inverse(*s, u).curve.points;
  const Point antipode = UnitSphere::unembed(Eigen::Vector3d(-1, 0, 0));
  for (const auto* q : {&a.front(), &a.back(), &b.front(), &b.back()}) EXPECT_LT(dist_oracle(*s, *q, antipode), 1e-6);
}

TEST(Validation, BadInputsRejected) {
  const auto s = make_model("sphere2");
  const SampledCurve c = sphere_great_circle(1.0, 20);
  const Frame away = orthonormal_frame(*s, pt(0, 0.3, 0));
  EXPECT_THROW(p_forward(*s, c, away), ValidationError);
  const Frame singular{c.base(), Mat::Ones(2, 2)};
  EXPECT_THROW(p_forward(*s, c, singular), ValidationError);

  auto v = constant_tc(*s, c.base(), v2(1, 0), c.grid);
  v.components.pop_back();
  EXPECT_THROW(p_inverse(*s, v), ValidationError);
  v = constant_tc(*s, c.base(), v2(1, 0), c.grid);
  v.frame0.columns = Mat::Zero(2, 2);
  EXPECT_THROW(p_inverse(*s, v), ValidationError);
}

class LinearizeInvariants : public ::testing::TestWithParam<std::string> {};

TEST_P(LinearizeInvariants, SuiteRowsPass) {
  const auto m = make_model(GetParam());
  testutil::expect_rows_pass(suite::linearize_checks(*m, 17, {}));
}

INSTANTIATE_TEST_SUITE_P(AllModels, LinearizeInvariants, ::testing::ValuesIn(model_names()));
