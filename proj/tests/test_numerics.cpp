#include <cmath>
#include <limits>
#include <numbers>

#include "common.hpp"

using namespace pathlin;

namespace {

Vec scalar(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}

std::vector<Vec> sample(const Grid& g, double (*f)(double)) {
  std::vector<Vec> out;
  for (double t : g.nodes()) out.push_back(scalar(f(t)));
  return out;
}

}  // namespace

TEST(Grid, UniformAndValidation) {
  const Grid g = Grid::uniform(-1.0, 1.0, 8);
  EXPECT_EQ(g.size(), 9u);
  EXPECT_DOUBLE_EQ(g.step(), 0.25);
  EXPECT_TRUE(g.is_uniform());
  EXPECT_EQ(g.node_at(0.0), 4u);
  EXPECT_THROW(Grid::uniform(1.0, 1.0, 4), ValidationError);
  EXPECT_THROW(Grid::from_nodes({0.0, 0.5, 0.5, 1.0}), ValidationError);
  EXPECT_FALSE(Grid::from_nodes({0.0, 0.1, 0.5, 1.0}).is_uniform());
}

TEST(FdWeights, KnownStencils) {
  const auto w = fd_weights({-2, -1, 0, 1, 2}, 1);
  const double expect[] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(w[i], expect[i], 1e-15);
  const auto w2 = fd_weights({-1, 0, 1}, 2);
  EXPECT_NEAR(w2[0], 1.0, 1e-15);
  EXPECT_NEAR(w2[1], -2.0, 1e-15);
  EXPECT_NEAR(w2[2], 1.0, 1e-15);
}

TEST(Integrate, ExponentialGrowth) {
  const Grid g = Grid::uniform(0.0, 1.0, 100);
  const auto tr = integrate([](double, const Vec& y) { return Vec(y); }, scalar(1.0), g);
  EXPECT_NEAR(tr.states.back()(0), std::numbers::e, 1e-8);
  EXPECT_EQ(tr.states.front()(0), 1.0);
}

TEST(Integrate, RotationReturnsHome) {
  const Grid g = Grid::uniform(0.0, 2.0 * std::numbers::pi, 400);
  auto f = [](double, const Vec& y) { return testutil::v2(-y(1), y(0)); };
  const auto tr = integrate(f, testutil::v2(1, 0), g);
  EXPECT_LT((tr.states.back() - testutil::v2(1, 0)).norm(), 1e-7);
  // dense output between nodes stays on the circle
  EXPECT_NEAR(tr(0.123).norm(), 1.0, 1e-9);
}

TEST(Integrate, ConstantRhsIsExact) {
  const Grid g = Grid::uniform(0.0, 3.0, 7);
  const auto tr = integrate([](double, const Vec&) { return scalar(2.0); }, scalar(-1.0), g);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(tr.states[j](0), -1.0 + 2.0 * g[j], 1e-14);
}

TEST(Integrate, NonFiniteStateThrows) {
  const Grid g = Grid::uniform(0.0, 1.0, 10);
  auto f = [](double t, const Vec& y) { return t > 0.5 ? scalar(std::numeric_limits<double>::quiet_NaN()) : Vec(y); };
  EXPECT_THROW(integrate(f, scalar(1.0), g), NonFiniteState);
}

TEST(Differentiate, QuadraticIsExact) {
  const Grid g = Grid::uniform(0.0, 1.0, 10);
  const auto d = differentiate(sample(g, [](double t) { return t * t; }), g);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(d[j](0), 2.0 * g[j], 1e-12);
}

TEST(Differentiate, QuarticIsExactAndConstantIsZero) {
  const Grid g = Grid::uniform(-1.0, 2.0, 12);
  const auto d = differentiate(sample(g, [](double t) { return t * t * t * t - t; }), g);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(d[j](0), 4 * std::pow(g[j], 3) - 1.0, 1e-10);
  const auto z = differentiate(sample(g, [](double) { return 3.0; }), g);
  for (const auto& v : z) EXPECT_NEAR(v(0), 0.0, 1e-12);
}

TEST(Differentiate, SineError) {
  const Grid g = Grid::uniform(0.0, 1.0, 100);
  const auto d = differentiate(sample(g, [](double t) { return std::sin(t); }), g);
  double worst = 0;
  for (std::size_t j = 0; j < g.size(); ++j) worst = std::max(worst, std::abs(d[j](0) - std::cos(g[j])));
  EXPECT_LT(worst, 1e-7);
}

TEST(Differentiate, CoarseOrNonUniformGridRejected) {
  const Grid g = Grid::uniform(0.0, 1.0, 3);
  EXPECT_THROW(differentiate(sample(g, [](double t) { return t; }), g), GridTooCoarse);
  const Grid nu = Grid::from_nodes({0.0, 0.1, 0.3, 0.6, 0.8, 1.0});
  EXPECT_ANY_THROW(differentiate(sample(nu, [](double t) { return t; }), nu));
}

TEST(Hermite, ReproducesCubic) {
  auto f = [](double t) { return t * t * t - 2 * t; };
  auto df = [](double t) { return 3 * t * t - 2; };
  const Hermite h{0.5, 1.5, scalar(f(0.5)), scalar(f(1.5)), scalar(df(0.5)), scalar(df(1.5))};
  EXPECT_NEAR(h.value(0.9)(0), f(0.9), 1e-14);
  EXPECT_NEAR(h.derivative(1.2)(0), df(1.2), 1e-13);
  auto big_f = [](double t) { return t * t * t * t / 4 - t * t; };
  EXPECT_NEAR(h.integral(1.5)(0), big_f(1.5) - big_f(0.5), 1e-14);
}

TEST(Cumtrapz, DifferentiateRecoversIntegrand) {
  const Grid g = Grid::uniform(0.0, 1.0, 200);
  const auto y = sample(g, [](double t) { return std::sin(t); });
  const auto d = differentiate(cumulative_trapezoid(y, g), g);
  double worst = 0;
  for (std::size_t j = 0; j < g.size(); ++j) worst = std::max(worst, std::abs(d[j](0) - y[j](0)));
  EXPECT_LT(worst, 1e-5);
}

TEST(Fit, PolynomialDataIsReproduced) {
  const Grid g = Grid::uniform(0.0, 2.0, 50);
  const auto y = sample(g, [](double t) { return 1.0 - 3.0 * t + 0.5 * t * t * t; });
  for (Basis b : {Basis::bernstein, Basis::monomial}) {
    const PolyCoeffs p = fit_poly(y, g, 3, b);
    const auto back = eval_poly(p, g);
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(back[j](0), y[j](0), 1e-10);
  }
  const auto mono = to_monomial(fit_poly(y, g, 3, Basis::bernstein));
  EXPECT_NEAR(mono[0](0), 1.0, 1e-9);
  EXPECT_NEAR(mono[1](0), -3.0, 1e-9);
  EXPECT_NEAR(mono[2](0), 0.0, 1e-9);
  EXPECT_NEAR(mono[3](0), 0.5, 1e-9);
}

TEST(Fit, ConstantHasEqualBernsteinCoefficients) {
  const Grid g = Grid::uniform(0.0, 1.0, 20);
  const auto p = fit_poly(sample(g, [](double) { return 4.0; }), g, 5);
  for (const auto& c : p.coeffs) EXPECT_NEAR(c(0), 4.0, 1e-10);
}

TEST(Fit, ResidualMonotoneInDegree) {
  const Grid g = Grid::uniform(0.0, 1.0, 400);
  const auto y = sample(g, [](double t) { return std::abs(t - 0.5); });
  double prev = std::numeric_limits<double>::infinity();
  for (int d = 0; d <= 12; ++d) {
    const double r = weighted_l2_distance(eval_poly(fit_poly(y, g, d), g), y, g);
    EXPECT_LE(r, prev + 1e-12) << "degree " << d;
    prev = r;
  }
}

TEST(Fit, ResidualOrthogonalToBasis) {
  const Grid g = Grid::uniform(0.0, 1.0, 100);
  const auto y = sample(g, [](double t) { return std::exp(t) * std::cos(5 * t); });
  const PolyCoeffs p = fit_poly(y, g, 4);
  const auto fit = eval_poly(p, g);
  const Vec w = quadrature_weights(g);
  for (int k = 0; k <= 4; ++k) {
    double ip = 0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      ip += w(static_cast<Eigen::Index>(j)) * (y[j](0) - fit[j](0)) *
            basis_values(Basis::bernstein, 4, 0.0, 1.0, g[j])(k);
    }
    EXPECT_NEAR(ip, 0.0, 1e-12);
  }
}

TEST(Fit, IllConditionedAndBadDegree) {
  const Grid g = Grid::uniform(0.0, 10.0, 200);
  const auto y = sample(g, [](double t) { return t; });
  EXPECT_THROW(fit_poly(y, g, 12, Basis::monomial), IllConditioned);
  EXPECT_NO_THROW(fit_poly(y, g, 12, Basis::bernstein));
  EXPECT_THROW(fit_poly(y, g, -1), ValidationError);
  const Grid tiny = Grid::uniform(0.0, 1.0, 2);
  EXPECT_THROW(fit_poly(sample(tiny, [](double t) { return t; }), tiny, 3), ValidationError);
}

TEST(NumericsInvariants, SuiteRowsPass) { testutil::expect_rows_pass(suite::numerics_checks()); }
