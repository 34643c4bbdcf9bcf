// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: acceptance <path-to-pathlin-cli>

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pathlin/io.hpp"
#include "pathlin/pathlin.hpp"
#include "pathlin/suite.hpp"

using namespace pathlin;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 7;
constexpr double kPi = std::numbers::pi;

int failures = 0;
double sweep_drift = 0.0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  std::printf("%s  criterion %2d  %-28s %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string sci(double x) { return suite::sci(x); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string secs(double s) {
  char b[32];
  std::snprintf(b, sizeof b, "%.1f s", s);
  return b;
}

// Refinement ratio, met trivially when the fine error is already at roundoff.
bool ratio_met(double coarse, double fine, double need) {
  return fine <= suite::kRoundoffFloor || coarse / fine >= need;
}

SampledCurve load_curve(const char* name, const ManifoldModel& model) {
  return io::curve_from_json(io::read_json(std::string(PATHLIN_FIXTURES) + "/" + name), model);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  for (const auto& name : model_names()) {
    const auto m = make_model(name);
    Rng rng = suite::stream(kSeed, name, "acceptance_roundtrip");
    const suite::RoundtripSweep s = suite::roundtrip_sweep(*m, rng, 30, 400, {});
    const bool ok = s.max_error_n < 1e-5 && ratio_met(s.max_error_n, s.max_error_2n, 8.0);
    pass = pass && ok;
    sweep_drift = std::max(sweep_drift, s.max_drift);
    detail += name + " " + sci(s.max_error_n) + " ratio " +
              (s.max_error_2n > suite::kRoundoffFloor ? sci(s.max_error_n / s.max_error_2n) : std::string("floor")) +
              "; ";
  }
  const double t = seconds_since(t0);
  pass = pass && t < 30.0;
  report(1, "roundtrip diffeomorphism", pass, detail + secs(t));
}

void criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int runs = 0;
  for (const char* name : {"sphere2", "hyperbolic2"}) {
    const auto m = make_model(name);
    std::vector<double> norms{0.1, 0.5};
    if (std::string(name) == "sphere2") norms.push_back(kPi / 2);
    Rng rng = suite::stream(kSeed, name, "acceptance_geodesic");
    for (int k = 0; k < 4; ++k) {
      const Point p = random_point(*m, rng);
      const Frame f0 = orthonormal_frame(*m, p);
      for (int d = 0; d < 6; ++d) {
        const double a = rng.uniform(0.0, 2 * kPi);
        for (double r : norms) {
          const Vec w = r * detail::vec2(std::cos(a), std::sin(a));
          TangentCurve v;
          v.base = p;
          v.frame0 = f0;
          v.grid = Grid::uniform(0.0, 1.0, 400);
          v.components.assign(v.grid.size(), w);
          const Point end = p_inverse(*m, v).curve.points.back();
          const Point expect = exp_oracle(*m, p, Tangent{p, f0.columns * w});
          worst = std::max(worst, dist_oracle(*m, end, expect));
          ++runs;
        }
      }
    }
  }
  const double t = seconds_since(t0);
  report(2, "geodesic oracle", worst < 1e-6 && t < 5.0,
         "max endpoint distance " + sci(worst) + " over " + std::to_string(runs) + " runs; " + secs(t));
}

void criterion3() {
  const auto s = make_model("sphere2");
  double basis = 0.0, chart = 0.0;
  for (const char* f : {"great_circle.json", "sphere_curve.json"}) {
    const SampledCurve c = load_curve(f, *s);
    const Frame a = orthonormal_frame(*s, c.base());
    const Frame b{a.base, a.columns * (Mat(2, 2) << 0.8, -1.1, 0.6, 0.9).finished()};
    basis = std::max(basis, basis_independence_check(*s, c, a, b));
  }
  // the great circle starts at the north pole, which the south chart cannot represent
  const SampledCurve c = load_curve("sphere_curve.json", *s);
  chart = chart_independence_check(*s, c, UnitSphere::kNorth, UnitSphere::kSouth);
  report(3, "basis/chart independence", basis < 1e-6 && chart < 1e-6,
         "basis change " + sci(basis) + ", start chart change " + sci(chart));
}

using Rows = std::map<std::string, std::vector<suite::Row>>;

// Looks up named suite rows across models; all must pass.
bool rows_pass(const Rows& rows, const std::vector<std::string>& names, std::string& detail,
               const std::vector<std::string>& only = {}) {
  bool pass = true;
  for (const auto& n : names) {
    double worst = 0.0;
    bool found = false, ok = true;
    std::string note;
    for (const auto& [model, list] : rows) {
      if (!only.empty() && std::find(only.begin(), only.end(), model) == only.end()) continue;
      for (const auto& r : list) {
        if (r.name != n) continue;
        found = true;
        ok = ok && r.pass;
        if (!r.pass) note += " " + model + " failed (" + sci(r.value) + ")";
        if (std::isfinite(r.value)) worst = std::max(worst, std::abs(r.value));
      }
    }
    pass = pass && found && ok;
    detail += n + (found ? " max|v| " + sci(worst) : std::string(" missing")) + note + "; ";
  }
  return pass;
}

void criterion8(const Rows& rows) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_a = 0.0, worst_b = 0.0;
  for (const auto& name : model_names()) {
    const auto m = make_model(name);
    Rng rng = suite::stream(kSeed, name, "acceptance_cube");
    const CubeLinearization lin = suite::random_cube_linearization(*m, rng, 200);
    const suite::CubeRoundtrip r = suite::cube_roundtrip(*m, lin, {});
    worst_a = std::max(worst_a, r.forward_of_inverse);
    worst_b = std::max(worst_b, r.inverse_of_forward);
  }
  const double t = seconds_since(t0);
  std::string d;
  const bool rest = rows_pass(rows, {"restriction_v1_exact", "restriction_v2_base_line", "degenerate_cube_zero"}, d);
  report(8, "cube maps", rest && worst_a < 1e-4 && worst_b < 1e-4 && t < 60.0,
         "P2(P2^-1) " + sci(worst_a) + ", P2^-1(P2) " + sci(worst_b) + " at 200x200; " + d + secs(t));
}

int run_cli(const std::string& cli, const std::string& args, const fs::path& out) {
  const std::string cmd = "'" + cli + "' " + args + " > '" + out.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion12(const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / ("pathlin_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const int a = run_cli(cli, "check all --seed 7 -o '" + (dir / "a.json").string() + "'", dir / "a.txt");
  const int b = run_cli(cli, "check all --seed 7 -o '" + (dir / "b.json").string() + "'", dir / "b.txt");
  const std::string ja = slurp(dir / "a.json"), jb = slurp(dir / "b.json");
  const std::string ta = slurp(dir / "a.txt"), tb = slurp(dir / "b.txt");
  const bool same = !ja.empty() && ja == jb && ta == tb;
  report(12, "determinism", same && a == b,
         "two runs of `check all --seed 7`: report " + std::to_string(ja.size()) + " bytes, " +
             (ja == jb ? "identical" : "DIFFERENT") + "; table " + (ta == tb ? "identical" : "DIFFERENT") +
             "; exit codes " + std::to_string(a) + "/" + std::to_string(b));
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <pathlin-cli>\n");
    return 2;
  }
  const std::string cli = argv[1];
  try {
    criterion1();
    criterion2();
    criterion3();

    Rows rows;
    for (const auto& name : model_names()) rows[name] = suite::run_model(*make_model(name), kSeed);

    std::string d4;
    const bool p4 = rows_pass(rows, {"norm_correspondence", "norm_preservation"}, d4);
    report(4, "norm correspondence", p4 && sweep_drift < 1e-5, d4 + "sweep drift " + sci(sweep_drift));

    std::string d5;
    report(5, "conjugation identity", rows_pass(rows, {"conjugation_N400", "conjugation_order"}, d5), d5);

    std::string d6;
    bool p6 = rows_pass(rows, {"polylike_residual"}, d6);
    p6 = rows_pass(rows, {"polylike_nonvanishing_ratio"}, d6, {"euclidean2"}) && p6;
    report(6, "polynomial-like residuals", p6, d6 + "degrees 0..2");

    std::string d7;
    bool p7 = rows_pass(rows, {"weierstrass_v_residual_monotone"}, d7);
    p7 = rows_pass(rows, {"weierstrass_c0_deg10_minus_deg3"}, d7, {"sphere2"}) && p7;
    report(7, "weierstrass density", p7, d7);

    criterion8(rows);

    std::string d9;
    report(9, "flow trivialization",
           rows_pass(rows, {"phi_p_equals_q", "flow_group_law", "trivialize_roundtrip", "support_exact_zero"}, d9),
           d9);

    std::string d10;
    report(10, "mapping-space charts", rows_pass(rows, {"mapping_chart_inverse", "mapping_chart_transition"}, d10),
           d10);

    std::string d11;
    report(11, "shape normalization",
           rows_pass(rows, {"arclength_unit_speed", "arclength_idempotent", "normalized_great_circle_linearization"},
                     d11),
           d11);

    criterion12(cli);
  } catch (const std::exception& e) {
    std::printf("FAIL  aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
