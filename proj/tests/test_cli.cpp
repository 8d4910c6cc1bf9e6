#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "cohexp/cli.hpp"
#include "cohexp/serialize.hpp"

using namespace cohexp;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("cohexp_cli_" + std::to_string(std::rand()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
};

const char* kLukOr = R"({"node":"tconorm","in_arity":2,"out_arity":1,"kind":"lukasiewicz"})";
const char* kMin = R"({"node":"tnorm","in_arity":2,"out_arity":1,"kind":"min"})";
const char* kConst1 = R"({"node":"const","in_arity":1,"out_arity":1,"values":[1.0]})";

}  // namespace

TEST_CASE("check reports the coherent fraction and witnesses") {
  TempDir d;
  const auto f = d.write("lukOR.fn", kLukOr);
  const auto r = run({"check", "--expr", f, "--alpha", "0.5", "--grid", "201"});
  CHECK(r.code == 0);
  CHECK(r.out.find("coherent fraction 0.877") != std::string::npos);
  CHECK(r.out.find("witness x=") != std::string::npos);

  const auto s = run({"check", "--expr", f, "--grid", "21", "--format", "structured"});
  CHECK(s.code == 0);
  const Json j = Json::parse(s.out);
  CHECK(j["verdict"] == "incoherent_with_witnesses");
  CHECK(sampling_from_json(j["sampling"]) == SamplingSpec::grid(21));
}

TEST_CASE("explain prints the DNF") {
  TempDir d;
  const auto f = d.write("min.fn", kMin);
  auto r = run({"explain", "--expr", f, "--alpha", "0.5"});
  CHECK(r.code == 0);
  CHECK(r.out == "x ∧ y\n");
  r = run({"explain", "--expr", d.write("or.fn", kLukOr), "--ascii", "--no-simplify"});
  CHECK(r.out == "(x & y & z) | (x & y & !z) | (x & z & !y) | (x & !y & !z) | (y & z & !x) | (y & !x & !z) | "
                 "(z & !x & !y)\n");
  r = run({"explain", "--expr", f, "--format", "structured"});
  CHECK(Json::parse(r.out)["outputs"][0]["formula"] == "x ∧ y");
}

TEST_CASE("demo-noncomp prints a witness") {
  TempDir d;
  const auto r = run({"demo-noncomp", "--gamma", "output-mod:" + d.write("const1.fn", kConst1), "--alpha", "0.5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("Gamma(g . f) != Gamma(g) . Gamma(f)") != std::string::npos);
  const auto e = run({"demo-noncomp", "--gamma", "extend", "--format", "structured"});
  CHECK(Json::parse(e.out)["result"] == "composition_undefined");
}

TEST_CASE("repair writes a coherent expression") {
  TempDir d;
  const auto f = d.write("or.fn", kLukOr);
  const auto out = (d.path / "fixed.fn").string();
  const auto r = run({"repair", "--expr", f, "--gamma", "extend", "--out", out});
  CHECK(r.code == 0);
  CHECK(r.out.find("coherent after: yes") != std::string::npos);
  CHECK(load_expr(out).in_arity() == 3);
  const auto again = run({"check", "--expr", out, "--grid", "21"});
  CHECK(again.out.find("verdict: coherent on sample") != std::string::npos);
}

TEST_CASE("functor-law subcommand") {
  TempDir d;
  const auto r = run({"functor-law", "--expr", d.write("min.fn", kMin), "--expr2", d.write("c.fn", kConst1)});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("holds", 0) == 0);
}

TEST_CASE("exit codes and error lines") {
  TempDir d;
  auto r = run({"check", "--expr", (d.path / "missing.fn").string()});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("E_FORMAT: ", 0) == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

  r = run({"check", "--expr", d.write("bad.fn", "{not json")});
  CHECK(r.code == 2);

  r = run({"frobnicate"});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("E_USAGE: ", 0) == 0);

  r = run({"check", "--expr", d.write("or.fn", kLukOr), "--grid", "5", "--random", "100"});
  CHECK(r.code == 2);

  r = run({"repair", "--expr", d.write("or2.fn", kLukOr), "--gamma", "output-mod:" + d.write("f.fn", kLukOr)});
  CHECK(r.code == 3);
  CHECK(r.err.rfind("E_CONTRACT: ", 0) == 0);

  r = run({"--help"});
  CHECK(r.code == 0);
}

TEST_CASE("config files supply flags; flags win") {
  TempDir d;
  d.write("or.fn", kLukOr);
  const auto cfg = d.write("cfg.json", R"({"expr": "or.fn", "grid": 11, "format": "structured"})");
  auto r = run({"check", "--config", cfg});
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["sampling"]["points_per_axis"] == 11);
  r = run({"check", "--config", cfg, "--grid", "21"});
  CHECK(Json::parse(r.out)["sampling"]["points_per_axis"] == 21);
}

TEST_CASE("identical invocations give identical output") {
  TempDir d;
  const auto f = d.write("or.fn", kLukOr);
  const auto a = run({"check", "--expr", f, "--random", "500", "--seed", "3", "--format", "structured"});
  const auto b = run({"check", "--expr", f, "--random", "500", "--seed", "3", "--format", "structured"});
  CHECK(a.out == b.out);
}

TEST_CASE("experiment subcommand writes artifacts") {
  TempDir d;
  const auto cfg = d.write("exp.json", R"({"setting": "fuzzy-or", "train_size": 100, "val_size": 40,
                                           "test_size": 100, "train": {"epochs": 5}})");
  const auto out = (d.path / "run").string();
  const auto r = run({"experiment", "--config", cfg, "--seed", "2", "--out", out});
  CHECK(r.code == 0);
  CHECK(r.out.find("Extended (nc)") != std::string::npos);
  for (const char* name : {"report.json", "report.txt", "model.json", "train.csv", "test.csv", "surface.csv"}) {
    CHECK(fs::exists(fs::path(out) / name));
  }
  CHECK(read_json_file(fs::path(out) / "report.json")["seed"] == 2);
  const Expr model = expr_from_json(Json{{"node", "mlp"}, {"weights_ref", "model.json"}}, out);
  CHECK(model.in_arity() == 2);
}
