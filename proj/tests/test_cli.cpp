#include <cstdio>
#include <filesystem>
#include <sstream>

#include "dfslab/cli.hpp"
#include "dfslab/serialization.hpp"
#include "test_helpers.hpp"

using namespace dfslab;
using testing::thrown_kind;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dfslab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("grid parsing") {
    CHECK(parse_grid("0.1,1,3") == std::vector<double>{0.1, 1.0, 3.0});
    const auto g = parse_grid("log:1e-4:1e-2:3");
    REQUIRE(g.size() == 3);
    CHECK(g[1] == doctest::Approx(1e-3));
    CHECK(thrown_kind([] { (void)parse_grid("1,x"); }) == ErrorKind::kConfig);
    CHECK(thrown_kind([] { (void)parse_grid("log:1:2"); }) == ErrorKind::kConfig);
    CHECK(thrown_kind([] { (void)parse_grid("log:-1:2:3"); }) == ErrorKind::kConfig);
    CHECK(thrown_kind([] { (void)parse_grid(""); }) == ErrorKind::kConfig);
  }

  TEST_CASE("phase-damping rate minimum") {
    const Result r = invoke({"rates", "--model", "phase_damping", "--lambda", "1"});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["first_order"].get<double>() == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(j["schema_version"] == kSchemaVersion);
  }

  TEST_CASE("dfs-find on two qubits") {
    const Result r = invoke({"dfs-find", "--model", "collective_dephasing", "--qubits", "2"});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["subspaces"].size() == 3);
    for (const auto& c : j["certificates"]) CHECK(c["pass"].get<bool>());
  }

  TEST_CASE("kraus, chi, coarse-grain and simulate produce documents") {
    for (const char* cmd : {"kraus", "chi", "coarse-grain", "simulate"}) {
      const Result r = invoke({cmd, "--model", "collective_dephasing", "--t-grid", "0.5"});
      CHECK(r.code == 0);
      CHECK(!Json::parse(r.out).is_discarded());
    }
    const Result csv = invoke({"simulate", "--model", "phase_damping", "--t-grid", "0,1", "--format", "csv"});
    CHECK(csv.code == 0);
    CHECK(csv.out.rfind("t,fidelity,deficit\n", 0) == 0);
  }

  TEST_CASE("configuration errors exit with 2") {
    CHECK(invoke({"rates", "--model", "nope"}).code == 2);
    CHECK(invoke({"rates", "--picture", "heisenberg"}).code == 2);
    CHECK(invoke({"stability-scan", "--eps-grid", "1e-2,1e-1"}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({"rates", "--model-file", "/nonexistent/model.json"}).code == 2);
    CHECK(invoke({"kraus", "--model", "perturbed_dfs_sme"}).code == 2);
    const Result r = invoke({"rates", "--model", "nope"});
    CHECK(r.err.find("unknown builtin") != std::string::npos);
  }

  TEST_CASE("output is deterministic") {
    const Result a = invoke({"rates", "--model", "perturbed_dfs", "--eps-grid", "0.1", "--state", "dfs"});
    const Result b = invoke({"rates", "--model", "perturbed_dfs", "--eps-grid", "0.1", "--state", "dfs"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }

  TEST_CASE("exported models re-ingest to the same result") {
    const std::string path = (std::filesystem::temp_directory_path() / "dfslab_cli_export.json").string();
    const Result a = invoke({"rates", "--model", "perturbed_dfs", "--omega", "1", "--eps-grid", "0.05",
                             "--state", "dfs", "--export-model", path});
    REQUIRE(a.code == 0);
    const Result b = invoke({"rates", "--model-file", path, "--eps-grid", "0.05", "--state", "dfs"});
    REQUIRE(b.code == 0);
    Json ja = Json::parse(a.out), jb = Json::parse(b.out);
    for (std::size_t i = 0; i < ja["terms"].size(); ++i) {
      CHECK(ja["terms"][i]["value"].get<double>() == jb["terms"][i]["value"].get<double>());
    }
    std::remove(path.c_str());
  }

  TEST_CASE("stability scan with an expected slope") {
    const std::vector<std::string> base{"stability-scan", "--model", "perturbed_dfs", "--state", "dfs",
                                        "--axis",         "eps",     "--eps-grid",     "log:1e-3:1e-1:5",
                                        "--t-grid",       "1"};
    auto with = [&](const char* slope) {
      auto args = base;
      args.push_back("--expect-slope");
      args.push_back(slope);
      return invoke(args);
    };
    const Result ok = with("2");
    CHECK(ok.code == 0);
    CHECK(Json::parse(ok.out)["slope"].get<double>() == doctest::Approx(2.0).epsilon(0.05));
    CHECK(with("1").code == 1);
  }

  TEST_CASE("table1 via the front end") {
    const Result r = invoke({"table1", "--format", "csv"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("row,picture,claim,measured,status\n", 0) == 0);
  }

  TEST_CASE("help exits cleanly") {
    const Result r = invoke({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("stability-scan") != std::string::npos);
  }
}
