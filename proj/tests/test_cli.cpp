#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "cmcfol/cli.hpp"

using namespace cmcfol;
using nlohmann::json;

namespace {

struct RunResult {
  int code;
  std::string out, err;
};

RunResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& text) {
  std::string path = "/tmp/cmcfol_test_" + name;
  std::ofstream f(path, std::ios::binary);
  f << text;
  return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("corpus list") {
  RunResult r = run({"corpus", "list"});
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["entries"].size() == 9);
}

TEST_CASE("eval-h on the built-in sphere slicing") {
  RunResult r = run({"eval-h", "--manifold", "builtin:euclidean-spheres",
                     "--points", "1,0;0,2"});
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["samples"][0]["H"].get<double>() == doctest::Approx(1.0));
  CHECK(j["samples"][1]["H"].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("missing manifold file is a usage error") {
  RunResult r = run({"eval-h", "--manifold", "nonexistent.json", "--points", "1,0"});
  CHECK(r.code == 2);
  json j = json::parse(r.out);
  CHECK(j.contains("error"));
  CHECK(j["error"].get<std::string>().find("file not found") != std::string::npos);
}

TEST_CASE("ah-expand reproduces the hyperbolic cmc coefficients") {
  RunResult r = run({"ah-expand", "--mode", "cmc", "--metric",
                     "builtin:hyperbolic-normal-form", "--order", "6"});
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  std::vector<double> want = {0, 1, 0, 0.5, 0, 0.375, 0};
  auto rbar = j["rbar"][0];
  REQUIRE(rbar.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(rbar[i].get<double>() == doctest::Approx(want[i]).epsilon(1e-10));
}

TEST_CASE("residual subcommand") {
  RunResult r = run({"residual", "--manifold", "builtin:euclidean-inverse-radius",
                     "--lambda", "-1", "--points", "1,0;0.6,0.8;0,2"});
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  for (const auto& rec : j["samples"])
    CHECK(std::abs(rec["residual"].get<double>()) < 1e-8);
}

TEST_CASE("detect-cmc subcommand") {
  RunResult yes = run({"detect-cmc", "--manifold", "builtin:euclidean-spheres",
                       "--leaves", "0.49,1,4"});
  CHECK(yes.code == 0);
  CHECK(json::parse(yes.out)["is_cmc"].get<bool>());

  RunResult no = run({"detect-cmc", "--manifold", "builtin:ellipse-noncmc",
                      "--leaves", "1,2"});
  CHECK(no.code == 0);
  CHECK_FALSE(json::parse(no.out)["is_cmc"].get<bool>());
}

TEST_CASE("linearize subcommand") {
  RunResult r = run({"linearize", "--manifold", "builtin:euclidean-spheres",
                     "--direction", "atan(x2/x1)", "--points", "1,0.2;0.5,0.1"});
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  for (const auto& rec : j["samples"])
    CHECK(std::abs(rec["dH"].get<double>()) < 1e-8);
}

TEST_CASE("relate subcommand") {
  RunResult r = run({"relate", "--H", "0", "--drho", "1", "--rho", "0"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["H_interior"].get<double>() == doctest::Approx(-1.0));
}

TEST_CASE("minimalize with a collar config") {
  std::string cfg = write_temp(
      "collar.json",
      R"({"t0": 0.0, "t_min": -0.6, "t_max": 0.6, "t_samples": 181,
          "seeds": [[0.0, 0.0], [0.2, 0.0]]})");
  RunResult r = run({"minimalize", "--manifold", "builtin:sphere-height",
                     "--config", cfg, "--verify"});
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["max_abs_error"].get<double>() < 1e-5);
  // omega(0.6) = -(1/2) log(1 - 0.36)
  double want = -0.5 * std::log(1.0 - 0.36);
  double got = 0.0;
  for (const auto& rec : j["omega_table"])
    if (rec["seed"].get<int>() == 0 &&
        std::abs(rec["t"].get<double>() - 0.6) < 1e-12)
      got = rec["omega"].get<double>();
  CHECK(got == doctest::Approx(want).epsilon(1e-6));
  std::remove(cfg.c_str());
}

TEST_CASE("custom manifold JSON round-trips through eval-h") {
  std::string manifold = write_temp("manifold.json", R"({
    "dimension": 2,
    "domain": [[-5, 5], [0.01, 5]],
    "variables": ["x", "z"],
    "metric": [["1/z^2", "0"], ["0", "1/z^2"]],
    "slicing": "z",
    "eps_df": 1e-9
  })");
  RunResult r = run({"eval-h", "--manifold", manifold, "--points", "0,1;0.5,2"});
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  for (const auto& rec : j["samples"])
    CHECK(rec["H"].get<double>() == doctest::Approx(-1.0).epsilon(1e-9));
  std::remove(manifold.c_str());
}

TEST_CASE("byte-identical output for identical inputs") {
  std::vector<std::string> args = {"eval-h", "--manifold",
                                   "builtin:poincare-ball", "--points",
                                   "0.3,0,0;0,0.5,0"};
  RunResult a = run(args);
  RunResult b = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(!a.out.empty());
}

TEST_CASE("csv output has fixed headers") {
  RunResult r = run({"eval-h", "--manifold", "builtin:euclidean-spheres",
                     "--points", "1,0", "--format", "csv"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("index,p1,p2,H,df_norm\n", 0) == 0);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"eval-h", "--points", "1,0"}).code == 2);  // missing manifold
  CHECK(run({"residual", "--manifold", "builtin:euclidean-spheres",
             "--lambda", "3", "--points", "1,0"}).code == 2);
}

TEST_CASE("domain errors exit with code 1") {
  // point outside the chart domain
  RunResult r = run({"eval-h", "--manifold", "builtin:euclidean-spheres",
                     "--points", "40,0"});
  CHECK(r.code == 1);
  json j = json::parse(r.out);
  CHECK(j["kind"].get<std::string>() == "domain");
}

}  // TEST_SUITE

TEST_SUITE("cli") {

TEST_CASE("normal-form JSON input, homogeneous and grid variants") {
  std::string homog = write_temp("nf_homog.json", R"({
    "n": 3,
    "h": [ [[1, 0], [0, 1]], [[1, 0], [0, 1]] ]
  })");
  RunResult r = run({"ah-expand", "--metric", homog, "--mode", "minimal",
                     "--order", "3"});
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  // step-0 factor of the (1 + r) h_0 collar: omega = -r/2 + ...
  CHECK(j["omega_total"][0][1].get<double>() == doctest::Approx(-0.5));
  std::remove(homog.c_str());

  std::string grid = write_temp("nf_grid.json", R"json({
    "n": 2,
    "boundary": {"shape": [32], "lo": [0], "hi": [6.283185307179586],
                 "stencil": "periodic"},
    "h": [ [["1"]], [["1 + 0.3*sin(x1)"]] ]
  })json");
  RunResult g = run({"ah-expand", "--metric", grid, "--mode", "cmc",
                     "--order", "3"});
  CHECK(g.code == 0);
  json jg = json::parse(g.out);
  CHECK(jg["boundary_nodes"].get<int>() == 32);
  for (const auto& step : jg["steps"]) {
    CHECK(step["defect_low_orders"].get<double>() < 1e-9);
    CHECK(step["ah_defect_const"].get<double>() < 1e-10);
  }
  std::remove(grid.c_str());

  // malformed grr is rejected with a domain error
  std::string bad = write_temp("nf_bad.json", R"({
    "n": 3,
    "h": [ [[1, 0], [0, 1]] ],
    "grr": [1.3]
  })");
  RunResult b = run({"ah-expand", "--metric", bad, "--mode", "minimal",
                     "--order", "2"});
  CHECK(b.code == 1);
  CHECK(json::parse(b.out)["error"].get<std::string>().find(
            "not asymptotically hyperbolic") != std::string::npos);
  std::remove(bad.c_str());
}

TEST_CASE("corpus export round-trips through eval-h") {
  std::string path = "/tmp/cmcfol_test_export.json";
  RunResult ex = run({"corpus", "export", "poincare-ball", "--out", path});
  CHECK(ex.code == 0);
  RunResult ev = run({"eval-h", "--manifold", path, "--points", "0.5,0,0"});
  CHECK(ev.code == 0);
  // leaf value t = 1/r = 2: H = -(t^2 + 1)/(2t) = -1.25
  CHECK(json::parse(ev.out)["samples"][0]["H"].get<double>() ==
        doctest::Approx(-1.25).epsilon(1e-10));
  std::remove(path.c_str());
}

TEST_CASE("corpus show prints the manifold format") {
  RunResult r = run({"corpus", "show", "poincare-ball"});
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["name"] == "poincare-ball");
  CHECK(j.contains("metric"));
  CHECK(j.contains("slicing"));
}

}  // TEST_SUITE
