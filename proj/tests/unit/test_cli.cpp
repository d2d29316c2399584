#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "manifest.hpp"
#include "schottky/json_io.hpp"

namespace fs = std::filesystem;
using schottky::cli::dispatch;
using schottky::json_io::Json;

namespace {

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("schottky_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string put(const std::string& name, const std::string& text) {
  fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

int run_binary(const std::string& args) {
  std::string cmd = std::string(SCHOTTKY_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string elementary3() {
  Json gens = Json::array();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      Json m = Json::array();
      for (int r = 0; r < 3; ++r) {
        Json row = Json::array();
        for (int c = 0; c < 3; ++c) row.push_back(r == c || (r == i && c == j) ? 1 : 0);
        m.push_back(row);
      }
      gens.push_back(m);
    }
  return put("elementary3.json", Json{{"generators", gens}}.dump());
}

}  // namespace

TEST_CASE("sha256 matches the FIPS 180-2 vector") {
  CHECK(schottky::cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("metric prints the exact squared distance") {
  // 1 - <v,w>^2 / (|v|^2 |w|^2) for v = (1,1), w = (1,0)
  int vw = 1, vv = 2, ww = 1;
  std::string expected = std::to_string(vv * ww - vw * vw) + "/" + std::to_string(vv * ww);
  Run r = run({"metric", "--place", "arch", put("p1.json", R"(["1","1"])"), put("p2.json", R"(["1","0"])")});
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["distance_sq"] == expected);

  Run padic = run({"metric", "--place", "padic:3", put("q1.json", "[1, 0]"), put("q2.json", "[1, 3]")});
  CHECK(padic.code == 0);
  CHECK(Json::parse(padic.out)["distance_sq"] == "1/9");
}

TEST_CASE("congruence image of the elementary generators mod 3") {
  // |SL_3(F_3)| = 3^3 (3^2 - 1)(3^3 - 1)
  const long order = 27 * 8 * 26;
  Run r = run({"congruence", "image", "--mod", "3", elementary3()});
  REQUIRE(r.code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["surjective"] == true);
  CHECK(j["order"] == order);
  CHECK(j["complete"] == true);
}

TEST_CASE("exit codes") {
  CHECK(run({"frobnicate"}).code == 3);
  CHECK(run({"congruence", "nope"}).code == 3);
  CHECK(run({}).code == 3);
  CHECK(run({"--help"}).code == 0);

  Run bad = run({"congruence", "image", "--mod", "3", put("bad.json", R"({"generators": [[1, 2])")});
  CHECK(bad.code == 3);
  CHECK(bad.err.find("byte") != std::string::npos);

  Run bad_rational =
      run({"congruence", "image", "--mod", "3", put("bad2.json", R"({"generators": [[["1", "x"], [0, 1]]]})")});
  CHECK(bad_rational.code == 3);
  CHECK(bad_rational.err.find("$.generators[0][0][1]") != std::string::npos);

  CHECK(run({"metric", put("missing.json", "[1]"), (scratch() / "nothing.json").string()}).code == 3);

  // a relation of length 2 is a verification failure
  std::string dup = put("dup.json", R"({"generators": [[[2,1],[1,1]], [[1,-1],[-1,2]]]})");
  Run rel = run({"pingpong", "freeness", dup, "--max-len", "4"});
  CHECK(rel.code == 1);
  CHECK(Json::parse(rel.out)["free"] == false);

  // more reduced words than the budget allows
  CHECK(run({"pingpong", "freeness", dup, "--max-len", "8", "--budget", "10"}).code == 2);
}

TEST_CASE("binary exit codes") {
  CHECK(run_binary("frobnicate") == 3);
  CHECK(run_binary("--help") == 0);
  CHECK(run_binary("congruence image --mod 3 " + elementary3()) == 0);
}

TEST_CASE("manifest records hashes and verdicts") {
  std::string input = elementary3();
  std::string out = (scratch() / "img.json").string();
  Run r = run({"congruence", "image", "--mod", "3", input, "--out", out});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  Json m = Json::parse(slurp(out + ".manifest.json"));
  CHECK(m["command"] == "congruence image");
  CHECK(m["inputs"][0]["sha256"] == schottky::cli::sha256_hex(slurp(input)));
  CHECK(m["outputs"][0]["sha256"] == schottky::cli::sha256_hex(slurp(out)));
  CHECK(m["verdicts"]["complete"] == true);
  CHECK(m["config"]["--mod"] == "3");
  CHECK(m["exit_code"] == 0);
}

TEST_CASE("unischottky add-flag and verify") {
  std::string empty = put("empty.json", R"({"elements": []})");
  std::string f1 =
      put("f1.json", R"({"p":[1,0,0],"L":{"hyperplane":[0,1,0]},"epsilon_sq":"1/100","delta_sq":"1/100"})");
  std::string f2 =
      put("f2.json", R"({"p":[0,1,0],"L":{"hyperplane":[1,0,-1]},"epsilon_sq":"1/100","delta_sq":"1/100"})");
  std::string s1 = (scratch() / "s1.json").string(), s2 = (scratch() / "s2.json").string();
  REQUIRE(run({"unischottky", "add-flag", empty, f1, "--out", s1}).code == 0);
  REQUIRE(run({"unischottky", "add-flag", s1, f2, "--out", s2}).code == 0);
  Run v = run({"unischottky", "verify", s2, "--free-product-length", "3"});
  CHECK(v.code == 0);
  Json j = Json::parse(v.out);
  CHECK(j["report"]["ok"] == true);
  CHECK(j["system"]["elements"].size() == 2);
  CHECK(j["free_product"]["injective"] == true);

  // a flag whose point lies in the repelling tube is refused
  std::string f3 =
      put("f3.json", R"({"p":[0,0,1],"L":{"hyperplane":[1,0,0]},"epsilon_sq":"1/100","delta_sq":"1/100"})");
  CHECK(run({"unischottky", "add-flag", s1, f3}).code == 1);
}

TEST_CASE("sl2 table, limit emission and membership") {
  std::string gens = put("sl2.json", R"({"generators": [[[13,8],[8,5]], [[5,8],[8,13]]]})");
  std::string table = (scratch() / "table.json").string();
  REQUIRE(run({"sl2", "table", gens, "--out", table}).code == 0);
  std::string svg = (scratch() / "limit.svg").string(), csv = (scratch() / "limit.csv").string();
  Run lim = run({"sl2", "limit", table, "--depth", "2", "--svg", svg, "--csv", csv});
  REQUIRE(lim.code == 0);
  Json j = Json::parse(lim.out);
  std::size_t count = j["count"];
  // 4 fixed points, each moved by reduced words of length <= 2 (1 + 4 + 12 words), minus repeats
  CHECK(count >= 4);
  CHECK(count <= 4 * 17);
  std::string csv_text = slurp(csv);
  CHECK(static_cast<std::size_t>(std::count(csv_text.begin(), csv_text.end(), '\n')) == count + 1);
  std::string svg_text = slurp(svg);
  CHECK(svg_text.rfind("<svg", 0) == 0);
  CHECK(svg_text.find("</svg>") != std::string::npos);

  Run in = run({"sl2", "membership", put("g.json", "[[13,8],[8,5]]"), table});
  CHECK(in.code == 0);
  CHECK(Json::parse(in.out)["member"] == true);
  Run out = run({"sl2", "membership", put("u.json", "[[1,1],[0,1]]"), table});
  CHECK(Json::parse(out.out)["member"] == false);
}

TEST_CASE("deterministic result JSON") {
  std::string gens = put("sl2d.json", R"({"generators": [[[13,8],[8,5]], [[5,8],[8,13]]]})");
  std::string phi =
      put("phi.json", R"({"alpha": [[[1,0],[0,1]], [[1,1],[0,1]]], "beta": [[[1,0],[0,1]], [[1,0],[1,1]]]})");
  std::string a = (scratch() / "r1.json").string(), b = (scratch() / "r2.json").string();
  REQUIRE(run({"sl2", "realize-ppp", phi, gens, "--out", a}).code == 0);
  REQUIRE(run({"sl2", "realize-ppp", phi, gens, "--out", b}).code == 0);
  CHECK(slurp(a) == slurp(b));
  Json r = Json::parse(slurp(a));
  CHECK(r["verified"] == true);
  CHECK(r["table"]["generators"].size() == 4);

  Json ma = Json::parse(slurp(a + ".manifest.json")), mb = Json::parse(slurp(b + ".manifest.json"));
  for (auto* m : {&ma, &mb}) {
    m->erase("started_at");
    m->erase("wall_time_seconds");
    m->erase("argv");
    m->erase("outputs");
    (*m)["config"].erase("--out");
  }
  CHECK(ma == mb);
}

TEST_CASE("density claims are labeled") {
  Run r = run({"congruence", "count-family", "--F", "1", "--base-mods", "4,3,5", "--mods", "3,4"});
  REQUIRE(r.code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["all_verified"] == true);
  CHECK(j["base"]["evidence"]["evidence_only"] == true);
  for (const auto& p : j["pairs"]) CHECK(p["evidence"]["evidence_only"] == true);
  for (const auto& c : j["claims"]) {
    CHECK(c["evidence_only"] == true);
    CHECK(c.contains("trusted_oracle"));
  }
}
