#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "pathlin/io.hpp"

using namespace pathlin;
using io::Json;
using testutil::pt;
using testutil::v2;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "<no ValidationError>";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST(Io, CurveRoundtripIsBitExact) {
  const auto s = make_model("sphere2");
  Rng rng(1);
  const SampledCurve c = wiggly_sphere_curve(rng, 30);
  const std::string text = io::dump(io::curve_to_json(*s, c));
  const SampledCurve back = io::curve_from_json(Json::parse(text), *s);
  ASSERT_EQ(back.points.size(), c.points.size());
  for (std::size_t j = 0; j < c.points.size(); ++j) {
    EXPECT_EQ(back.points[j].chart, c.points[j].chart);
    EXPECT_EQ(back.points[j].coords, c.points[j].coords);
  }
  EXPECT_EQ(back.grid.nodes(), c.grid.nodes());
  EXPECT_EQ(back.order, c.order);
  EXPECT_EQ(io::dump(io::curve_to_json(*s, back)), text);
}

TEST(Io, TangentCurveRoundtripAndDefaultFrame) {
  const auto h = make_model("hyperbolic2");
  TangentCurve v;
  v.base = pt(0, 0.1, 0.2);
  v.frame0 = Frame{v.base, (Mat(2, 2) << 1, 0.5, 0, 2).finished()};
  v.grid = Grid::from_nodes({0.0, 0.1, 0.4, 1.0});
  v.components = {v2(1, 2), v2(3, 4), v2(5, 6), v2(7, 8)};
  Json j = io::tangent_curve_to_json(*h, v);
  const TangentCurve back = io::tangent_curve_from_json(j, *h);
  EXPECT_EQ(back.frame0.columns, v.frame0.columns);
  EXPECT_FALSE(back.grid.is_uniform());
  EXPECT_EQ(back.components[2], v.components[2]);
  j.erase("frame0");
  const TangentCurve dflt = io::tangent_curve_from_json(j, *h);
  EXPECT_LT((frame_gram(*h, dflt.frame0) - Mat::Identity(2, 2)).norm(), 1e-13);
}

TEST(Io, CubeAndPointsRoundtrip) {
  const auto e = make_model("euclidean2");
  CubeSample a;
  a.grid1 = Grid::uniform(0, 1, 2);
  a.grid2 = Grid::uniform(0, 1, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    a.points.emplace_back();
    for (std::size_t k = 0; k < 4; ++k) a.points.back().push_back(pt(0, double(i), double(k)));
  }
  const CubeSample b = io::cube_from_json(io::cube_to_json(*e, a), *e);
  EXPECT_EQ(b.points[2][3].coords, a.points[2][3].coords);
  const std::vector<Point> pts{pt(0, 1, 2), pt(0, -3, 4)};
  const auto back = io::points_from_json(io::points_to_json(*e, pts), *e);
  EXPECT_EQ(back[1].coords, pts[1].coords);
}

TEST(Io, MalformedFixtureNamesTheField) {
  const Json j = io::read_json(testutil::fixture("malformed.json"));
  const auto m = io::model_of(j);
  const std::string msg = message_of([&] { io::curve_from_json(j, *m); });
  EXPECT_TRUE(contains(msg, "samples has 10 entries but grid has 11 nodes")) << msg;
}

TEST(Io, HeaderAndFieldErrors) {
  const auto e = make_model("euclidean2");
  Json j = io::curve_to_json(*e, SampledCurve{Grid::uniform(0, 1, 1), {pt(0, 0, 0), pt(0, 1, 0)}});
  Json bad = j;
  bad["schema_version"] = 2;
  EXPECT_TRUE(contains(message_of([&] { io::curve_from_json(bad, *e); }), "schema_version"));
  bad = j;
  bad.erase("grid");
  EXPECT_TRUE(contains(message_of([&] { io::curve_from_json(bad, *e); }), "'grid'"));
  bad = j;
  bad["kind"] = "cube";
  EXPECT_TRUE(contains(message_of([&] { io::curve_from_json(bad, *e); }), "kind"));
  bad = j;
  bad["samples"][1]["coords"] = Json::array({1.0});
  EXPECT_TRUE(contains(message_of([&] { io::curve_from_json(bad, *e); }), "samples[1].coords"));
  bad = j;
  bad["samples"][0]["chart"] = 3;
  EXPECT_TRUE(contains(message_of([&] { io::curve_from_json(bad, *e); }), "unknown chart"));
  bad = j;
  bad["grid"] = Json{{"nodes", {0.0, 0.0}}};
  EXPECT_TRUE(contains(message_of([&] { io::curve_from_json(bad, *e); }), "increasing"));
  bad = j;
  bad["manifold"] = "moebius";
  EXPECT_TRUE(contains(message_of([&] { io::model_of(bad); }), "moebius"));
}

TEST(Io, PointOutsideChartRejected) {
  const auto h = make_model("hyperbolic2");
  const Json p{{"chart", 0}, {"coords", {1.2, 0.0}}};
  EXPECT_TRUE(contains(message_of([&] { io::point(p, *h, "base"); }), "outside"));
}

TEST(Io, UnreadableAndUnparsableFiles) {
  EXPECT_THROW(io::read_json("/nonexistent/x.json"), ValidationError);
  const auto tmp = std::filesystem::temp_directory_path() / "pathlin_io_garbage.json";
  std::ofstream(tmp) << "{ not json";
  EXPECT_THROW(io::read_json(tmp.string()), ValidationError);
  std::filesystem::remove(tmp);
  EXPECT_THROW(io::write_text("/nonexistent/dir/out.json", "x"), ValidationError);
}

TEST(Io, CsvLayouts) {
  const auto e = make_model("euclidean2");
  const SampledCurve c{Grid::uniform(0, 1, 1), {pt(0, 0.1, 0.2), pt(0, 1, 0)}};
  EXPECT_EQ(io::curve_csv(*e, c), "t,x0,x1,chart\n0,0.10000000000000001,0.20000000000000001,0\n1,1,0,0\n");
  TangentCurve v;
  v.grid = c.grid;
  v.components = {v2(0.5, 1), v2(-2, 0)};
  EXPECT_EQ(io::tangent_curve_csv(*e, v), "t,v0,v1\n0,0.5,1\n1,-2,0\n");
  EXPECT_EQ(io::points_csv(*e, {pt(0, 3, 4)}), "index,x0,x1,chart\n0,3,4,0\n");
}

TEST(Io, FixturesLoad) {
  for (const char* name : {"euclid_line.json", "great_circle.json", "sphere_curve.json"}) {
    const Json j = io::read_json(testutil::fixture(name));
    EXPECT_NO_THROW(io::curve_from_json(j, *io::model_of(j))) << name;
  }
  const Json t = io::read_json(testutil::fixture("tangent_parabola.json"));
  EXPECT_NO_THROW(io::tangent_curve_from_json(t, *io::model_of(t)));
  const Json cu = io::read_json(testutil::fixture("euclid_cube.json"));
  EXPECT_NO_THROW(io::cube_from_json(cu, *io::model_of(cu)));
  const Json pts = io::read_json(testutil::fixture("disk_points.json"));
  EXPECT_EQ(io::points_from_json(pts, *io::model_of(pts)).size(), 4u);
}
