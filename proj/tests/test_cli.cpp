#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct Run {
  int status;
  std::string out;
};

// Runs the CLI from the source root so that reported paths are relative.
Run cli(const std::string& args) {
  const char* bin = std::getenv("PROBFPC_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "PROBFPC_BIN is not set");
  const std::string cmd = std::string("cd '") + PROBFPC_SOURCE_DIR + "' && '" + bin + "' " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (auto n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  const int raw = pclose(p);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string golden(const std::string& name) {
  std::ifstream in(std::string(PROBFPC_SOURCE_DIR) + "/tests/golden/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("check") {
  auto ok = cli("check corpus/fair.pfpc");
  CHECK(ok.status == 0);
  CHECK(ok.out == "Unit → (Unit+Unit)\n");
  auto bad = cli("check corpus/ill_typed.pfpc");
  CHECK(bad.status == 1);
  CHECK(contains(bad.out, "corpus/ill_typed.pfpc:3:4:"));
  auto empty = cli("check corpus/empty.pfpc");
  CHECK(empty.status == 1);
  CHECK(contains(empty.out, "corpus/empty.pfpc:1:1:"));
  CHECK(cli("check corpus/no_such_file.pfpc").status == 1);
}

TEST_CASE("probterm tables") {
  auto den = cli("probterm corpus/geo.pfpc --depth 3 --mode den");
  CHECK(den.status == 0);
  CHECK(contains(den.out, "0\t1/2\n1\t3/4\n2\t7/8\n3\t15/16\n"));
  // Three operational steps per round of the geometric process.
  auto op = cli("probterm corpus/geo.pfpc --depth 3");
  CHECK(contains(op.out, "0\t1/2\n1\t1/2\n2\t1/2\n3\t3/4\n"));
  auto unit = cli("probterm corpus/unit.pfpc --depth 4");
  CHECK(contains(unit.out, "4\t1\n"));
  CHECK(contains(unit.out, "limit\t1\n"));
  auto div = cli("probterm corpus/diverge.pfpc --depth 4");
  CHECK(contains(div.out, "4\t0\n"));
  CHECK(contains(div.out, "limit\t0\n"));
  auto approx = cli("probterm corpus/geo.pfpc --depth 1 --mode den --approx");
  CHECK(contains(approx.out, "0.750000"));
}

TEST_CASE("compare") {
  auto same = cli("compare corpus/fair_harness.pfpc corpus/fair_harness.pfpc --eps 0");
  CHECK(same.status == 0);
  CHECK(contains(same.out, "pass"));
  CHECK(cli("compare corpus/fair_harness.pfpc corpus/fair_harness.pfpc --left-mode op --right-mode den").status == 0);
  CHECK(cli("compare corpus/fair_harness.pfpc corpus/coin_harness.pfpc").status == 0);
  auto diff = cli("compare corpus/unit.pfpc corpus/diverge.pfpc");
  CHECK(diff.status == 2);
  CHECK(cli("compare corpus/geo.pfpc corpus/unit.pfpc").status == 1);
}

TEST_CASE("refine") {
  CHECK(cli("refine corpus/id_hes.pfpc corpus/id.pfpc --both --fuel 6 --horizon 16 --eps 1/256").status == 0);
  auto no = cli("refine corpus/zero.pfpc corpus/one.pfpc");
  CHECK(no.status == 2);
  CHECK(contains(no.out, "Unknown"));
  CHECK(cli("refine corpus/randw_es.pfpc corpus/randw2.pfpc --both --fuel 4").status == 0);
  CHECK(cli("refine corpus/zero.pfpc corpus/unit.pfpc").status == 1);
}

TEST_CASE("examples") {
  auto list = cli("examples list");
  CHECK(list.status == 0);
  CHECK(contains(list.out, "fair_from(1/3)"));
  auto run = cli("examples run 'geo(1/2)' --depth 2");
  CHECK(run.status == 0);
  CHECK(cli("examples run nothing").status == 1);
}

TEST_CASE("JSON output is stable") {
  const std::pair<const char*, const char*> cases[] = {
      {"probterm corpus/geo.pfpc --depth 8 --format json --seed 7", "geo_op.json"},
      {"probterm corpus/geo.pfpc --depth 8 --mode den --format json --seed 7", "geo_den.json"},
      {"compare corpus/fair_harness.pfpc corpus/coin_harness.pfpc --depth 16 --format json --seed 7", "fair_compare.json"},
      {"refine corpus/id_hes.pfpc corpus/id.pfpc --both --fuel 6 --horizon 16 --eps 1/256 --probes 0,1 --format json "
       "--seed 7",
       "id_hes_refine.json"},
  };
  for (const auto& [args, file] : cases) {
    INFO(args);
    auto a = cli(args);
    auto b = cli(args);
    CHECK(a.out == b.out);
    CHECK(a.out == golden(file));
    auto j = nlohmann::json::parse(a.out);
    CHECK(j["seed"] == 7);
  }
}

TEST_CASE("the seed falls back to the environment") {
  auto j = nlohmann::json::parse(cli("probterm corpus/unit.pfpc --depth 1 --format json").out);
  CHECK(j.contains("seed"));
  const char* bin = std::getenv("PROBFPC_BIN");
  REQUIRE(bin != nullptr);
  std::string cmd = std::string("PROBFPC_SEED=11 '") + bin + "' probterm '" + PROBFPC_SOURCE_DIR +
                    "/corpus/unit.pfpc' --depth 1 --format json";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (auto n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  pclose(p);
  CHECK(nlohmann::json::parse(out)["seed"] == 11);
}
