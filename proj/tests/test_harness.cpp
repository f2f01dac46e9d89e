// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ebm/harness/acceptance.hpp"
#include "ebm/harness/config.hpp"

using namespace ebm::harness;
using nlohmann::json;

namespace {

json schema() {
  return {{"seed", 0}, {"output_dir", "out"}, {"name", nullptr}, {"rate", 0.5},
          {"inner", {{"n", 3}, {"flag", false}}}, {"list", {1.0, 2.0}}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ebmlab_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("schema validation") {
  const auto ok = merge_with_schema(schema(), {{"name", "x"}, {"rate", 2}, {"inner", {{"n", 7}}}});
  CHECK(ok["rate"].get<double>() == 2.0);
  CHECK(ok["inner"]["n"] == 7);
  CHECK(ok["inner"]["flag"] == false);
  CHECK(ok["seed"] == 0);

  CHECK_THROWS_AS(merge_with_schema(schema(), {{"name", "x"}, {"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(merge_with_schema(schema(), {{"name", "x"}, {"inner", {{"m", 1}}}}), ConfigError);
  CHECK_THROWS_AS(merge_with_schema(schema(), json::object()), ConfigError);  // name is required
  CHECK_THROWS_AS(merge_with_schema(schema(), {{"name", 3}}), ConfigError);
  CHECK_THROWS_AS(merge_with_schema(schema(), {{"name", "x"}, {"seed", -1}}), ConfigError);
  CHECK_THROWS_AS(merge_with_schema(schema(), {{"name", "x"}, {"seed", 1.5}}), ConfigError);
  CHECK_THROWS_AS(merge_with_schema(schema(), {{"name", "x"}, {"rate", "fast"}}), ConfigError);
  CHECK_THROWS_AS(merge_with_schema(schema(), {{"name", "x"}, {"list", {1.0, "two"}}}), ConfigError);
  CHECK_THROWS_AS(merge_with_schema(schema(), {{"name", "x"}, {"inner", {{"flag", 1}}}}), ConfigError);
  CHECK_THROWS_AS(merge_with_schema(schema(), json::array()), ConfigError);
}

TEST_CASE("config hash") {
  const auto a = make_config("demo", schema(), {{"name", "x"}, {"output_dir", "a"}});
  const auto b = make_config("demo", schema(), {{"name", "x"}, {"output_dir", "b"}});
  const auto c = make_config("demo", schema(), {{"name", "x"}, {"seed", 1}});
  const auto d = make_config("train", schema(), {{"name", "x"}});
  CHECK(a.hash.size() == 16);
  CHECK(a.hash == b.hash);  // the output directory is not part of the experiment
  CHECK(a.hash != c.hash);
  CHECK(a.hash != d.hash);
  CHECK(header_line(c) == "# ebmlab 0.1.0 config=" + c.hash + " seed=1");
  // Defaults written out explicitly hash the same as omitted ones.
  CHECK(make_config("demo", schema(), {{"name", "x"}, {"rate", 0.5}}).hash == a.hash);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("load_config") {
  const auto dir = scratch("load");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "good.json") << R"({"name": "x", "inner": {"n": 2}})";
  std::ofstream(dir / "broken.json") << R"({"name": )";
  CHECK(load_config("demo", schema(), dir / "good.json").at("inner.n") == 2);
  CHECK_THROWS_AS(load_config("demo", schema(), dir / "broken.json"), ConfigError);
  CHECK_THROWS_AS(load_config("demo", schema(), dir / "missing.json"), ConfigError);
}

TEST_CASE("output files carry the header and the manifest checksums them") {
  const auto dir = scratch("out");
  const auto cfg = make_config("demo", schema(), {{"name", "x"}, {"output_dir", dir.string()}});
  OutputDir out(cfg);
  out.write_text("a.csv", "x,y\n1,2\n");
  out.write_pgm("sub/img.pgm", "P2\n1 1\n255\n0\n");
  out.write_json("m.json", {{"k", 1}});
  const auto manifest = json::parse(slurp(out.write_manifest()));

  const auto header = header_line(cfg);
  CHECK(slurp(dir / "a.csv") == header + "\nx,y\n1,2\n");
  CHECK(slurp(dir / "sub/img.pgm") == "P2\n" + header + "\n1 1\n255\n0\n");
  CHECK(json::parse(slurp(dir / "m.json"))["header"]["config"] == cfg.hash);
  CHECK_THROWS(out.write_pgm("bad.pgm", "P3\n"));

  CHECK(manifest["command"] == "demo");
  CHECK(manifest["header"]["config"] == cfg.hash);
  CHECK_FALSE(manifest["config"].contains("output_dir"));
  REQUIRE(manifest["files"].size() == 3);
  for (const auto& f : manifest["files"]) {
    const auto bytes = slurp(dir / f["path"].get<std::string>());
    CHECK(f["bytes"] == bytes.size());
    CHECK(f["sha256"] == sha256_hex(bytes));
  }
}

TEST_CASE("output directory override") {
  const auto dir = scratch("env");
  setenv(kOutputDirEnv, dir.string().c_str(), 1);
  const auto cfg = make_config("demo", schema(), {{"name", "x"}, {"output_dir", "elsewhere"}});
  unsetenv(kOutputDirEnv);
  CHECK(cfg.output_dir == dir);
  CHECK(make_config("demo", schema(), {{"name", "x"}, {"output_dir", "elsewhere"}}).output_dir == "elsewhere");
}

TEST_CASE("checks") {
  CHECK(check_le("a", 1, 1).pass);
  CHECK_FALSE(check_lt("a", 1, 1).pass);
  CHECK(check_gt("a", 2, 1).pass);
  CHECK_FALSE(check_ge("a", 0, 1).pass);
  CHECK_FALSE(check_le("a", std::nan(""), 1).pass);
  CHECK_FALSE(check_ge("a", std::nan(""), 1).pass);
  CHECK(info("a", std::nan("")).pass);
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3) == "0.333333");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("suites") {
  CHECK(suite_members("all").size() == 11);
  CHECK(suite_members("empty").empty());
  CHECK(suite_members("oracle").size() == 3);
  CHECK(suite_members("seq-label").size() == 3);
  CHECK_THROWS_AS(suite_members("nope"), std::invalid_argument);
  for (const auto& name : suite_names())
    for (const auto* c : suite_members(name)) CHECK(c->time_limit_seconds > 0);
}

TEST_CASE("empty suite report") {
  const auto run = run_suite("empty", 3);
  CHECK(run.pass());
  std::ostringstream out;
  write_report(out, run, "# h");
  CHECK(out.str() ==
        "# h\n# suite=empty seed=3\ncriterion,name,check,measured,relation,threshold,status,note\n"
        "total,,,0/0,,,PASS,\n");
}

TEST_CASE("report rows and repeatability") {
  SuiteRun run;
  run.suite = "x";
  run.seed = 1;
  run.results.push_back({4, "demo", {check_le("a, b", 0.5, 1, "say \"hi\""), info("c", 2)}});
  run.results.push_back({5, "bad", {}});
  std::ostringstream out;
  write_report(out, run, "# h");
  CHECK(out.str() ==
        "# h\n# suite=x seed=1\ncriterion,name,check,measured,relation,threshold,status,note\n"
        "4,demo,\"a, b\",0.5,<=,1,ok,\"say \"\"hi\"\"\"\n4,demo,c,2,,,ok,\n4,demo,*,,,,PASS,\n"
        "5,bad,*,,,,FAIL,\ntotal,,,1/2,,,FAIL,\n");

  // A criterion with no checks fails; exceptions become failing rows.
  CHECK_FALSE(run.results[1].pass());
  const auto a = criterion_appendix_invariants(5), b = criterion_appendix_invariants(5);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].measured == b[i].measured);
  CHECK(verify_header("all", 1) == verify_header("all", 1));
  CHECK(verify_header("all", 1) != verify_header("all", 2));
}
