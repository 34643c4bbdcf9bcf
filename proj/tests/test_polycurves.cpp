#include <cmath>

#include "common.hpp"

using namespace pathlin;
using testutil::pt;
using testutil::v2;

namespace {

PolyCoeffs mono(std::vector<Vec> c) {
  PolyCoeffs p{Basis::monomial, static_cast<int>(c.size()) - 1, 0.0, 1.0, std::move(c)};
  return p;
}

SampledCurve euclid_parabola(std::size_t n) {
  SampledCurve c;
  c.grid = Grid::uniform(0, 1, n);
  c.order = 6;
  for (double t : c.grid.nodes()) c.points.push_back(pt(0, 1 + t, 2 + t * t));
  return c;
}

}  // namespace

TEST(PolyLike, DegreeZeroIsOracleGeodesic) {
  const auto s = make_model("sphere2");
  const Point p = UnitSphere::unembed(Eigen::Vector3d(0.0, 0.6, 0.8));
  const Frame f0 = orthonormal_frame(*s, p);
  const Vec w = v2(0.8, -0.5);
  const auto pl = make_polynomial_like(*s, p, f0, mono({w}), Grid::uniform(0, 1, 200));
  for (std::size_t j = 0; j < pl.realized.points.size(); ++j) {
    const double t = pl.realized.grid[j];
    const Point expect = exp_oracle(*s, p, Tangent{p, f0.columns * (t * w)});
    EXPECT_LT(dist_oracle(*s, pl.realized.points[j], expect), 1e-6);
  }
  EXPECT_LT(pl.residual, 1e-5);
}

TEST(PolyLike, ZeroCoefficientsGiveConstantCurve) {
  const auto t = make_model("torus2");
  const Point p = pt(1, 0.4, -0.2);
  const auto pl = make_polynomial_like(*t, p, orthonormal_frame(*t, p), mono({v2(0, 0), v2(0, 0)}),
                                       Grid::uniform(0, 1, 20));
  for (const auto& q : pl.realized.points) EXPECT_LT(dist_oracle(*t, p, q), 1e-15);
}

TEST(PolyLike, EuclideanParabola) {
  const auto e = make_model("euclidean2");
  const auto pl = make_polynomial_like(*e, pt(0, 1, 2), orthonormal_frame(*e, pt(0, 1, 2)),
                                       mono({v2(1, 0), v2(0, 2)}), Grid::uniform(0, 1, 50));
  for (std::size_t j = 0; j < pl.realized.points.size(); ++j) {
    const double t = pl.realized.grid[j];
    EXPECT_LT((pl.realized.points[j].coords - v2(1 + t, 2 + t * t)).norm(), 1e-12);
  }
  EXPECT_THROW(make_polynomial_like(*e, pt(0, 0, 0), orthonormal_frame(*e, pt(0, 0, 0)),
                                    PolyCoeffs{Basis::monomial, 2, 0, 1, {v2(1, 0)}}, Grid::uniform(0, 1, 50)),
               ValidationError);
}

TEST(CovariantPower, Examples) {
  const auto s = make_model("sphere2");
  EXPECT_LT(covariant_power_residual(*s, sphere_great_circle(1.0, 400), 1), 1e-5);
  const auto e = make_model("euclidean2");
  const SampledCurve par = euclid_parabola(100);
  EXPECT_LT(covariant_power_residual(*e, par, 2), 1e-8);
  EXPECT_NEAR(covariant_power_residual(*e, par, 1), 2.0, 1e-8);
  SampledCurve still = par;
  for (auto& q : still.points) q = pt(0, 3, 3);
  EXPECT_LT(covariant_power_residual(*e, still, 3), 1e-12);
  EXPECT_THROW(covariant_power_residual(*e, euclid_parabola(7), 2), GridTooCoarse);
  EXPECT_THROW(covariant_power_residual(*e, par, 0), ValidationError);
}

TEST(Conjugation, Examples) {
  const auto s = make_model("sphere2");
  EXPECT_LT(conjugation_residual(*s, sphere_great_circle(1.0, 400)), 1e-5);
  const auto e = make_model("euclidean2");
  EXPECT_LT(conjugation_residual(*e, euclid_parabola(100)), 1e-6);
  Rng rng(12);
  EXPECT_LT(conjugation_residual(*s, random_smooth_curve(*s, rng, 400).curve), 1e-4);
  SampledCurve rough = euclid_parabola(100);
  rough.order = 1;
  EXPECT_THROW(conjugation_residual(*e, rough), ValidationError);
}

TEST(Weierstrass, Examples) {
  const auto s = make_model("sphere2");
  EXPECT_LT(weierstrass_fit(*s, sphere_great_circle(1.0, 400), 0).c0_error, 1e-6);
  const auto e = make_model("euclidean2");
  const auto par = weierstrass_fit(*e, euclid_parabola(100), 1);
  EXPECT_LT(par.c0_error, 1e-9);
  EXPECT_LT(par.c1_error, 1e-9);
  Rng rng(14);
  const SampledCurve w = wiggly_sphere_curve(rng, 400);
  EXPECT_LT(weierstrass_fit(*s, w, 10).c0_error, weierstrass_fit(*s, w, 3).c0_error);
  EXPECT_THROW(weierstrass_fit(*e, euclid_parabola(100), 15, Basis::monomial), IllConditioned);
}

TEST(Taylor, GeodesicAndParabola) {
  const auto s = make_model("sphere2");
  const auto g = taylor_coefficients(*s, sphere_great_circle(1.0, 400), 2);
  EXPECT_LT((g[0] - v2(1, 0)).norm(), 1e-6);
  EXPECT_LT(g[1].norm(), 1e-5);
  EXPECT_LT(g[2].norm(), 1e-4);
  const auto e = make_model("euclidean2");
  const auto c = taylor_coefficients(*e, euclid_parabola(100), 1);
  EXPECT_LT((c[0] - v2(1, 0)).norm(), 1e-10);
  EXPECT_LT((c[1] - v2(0, 2)).norm(), 1e-8);
}

TEST(Taylor, RecoversSpherePolynomialCoefficients) {
  const auto s = make_model("sphere2");
  Rng rng(15);
  const Point p = random_point(*s, rng);
  const Frame f0 = orthonormal_frame(*s, p);
  const std::vector<Vec> a{v2(0.7, -0.2), v2(0.3, 0.5), v2(-0.4, 0.2)};
  const auto pl = make_polynomial_like(*s, p, f0, mono(a), Grid::uniform(0, 1, 400));
  const auto got = taylor_coefficients(*s, pl.realized, 2, f0);
  for (int k = 0; k <= 2; ++k) EXPECT_LT((got[k] - a[k]).norm(), 1e-4) << k;
}

TEST(Taylor, OrderAboveRegularityRejected) {
  const auto e = make_model("euclidean2");
  SampledCurve c = euclid_parabola(100);
  c.order = 2;
  EXPECT_THROW(taylor_coefficients(*e, c, 2), ValidationError);
  EXPECT_THROW(taylor_coefficients(*e, c, -1), ValidationError);
}

class PolyInvariants : public ::testing::TestWithParam<std::string> {};

TEST_P(PolyInvariants, SuiteRowsPass) {
  const auto m = make_model(GetParam());
  testutil::expect_rows_pass(suite::polycurves_checks(*m, 23, {}));
}

INSTANTIATE_TEST_SUITE_P(AllModels, PolyInvariants, ::testing::ValuesIn(model_names()));
