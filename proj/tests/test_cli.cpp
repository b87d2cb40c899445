#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflow/cli.hpp"

using geoflow::run_cli;

namespace {

std::string model(const std::string& name) { return std::string(GEOFLOW_MODELS_DIR) + "/" + name; }

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("validate exit codes") {
    CHECK(run({"model", "validate", "--model", model("bolza.json")}).code == 0);
    CHECK(run({"model", "validate", "--model", model("bolza_bumps.json")}).code == 0);
    CHECK(run({"model", "validate", "--model", model("oversized_bump.json")}).code == 3);
    CHECK(run({"model", "validate", "--model", model("no_such_file.json")}).code == 2);
    const Run r = run({"model", "validate", "--model", model("bolza.json")});
    CHECK(r.out.rfind("kind=fuchsian", 0) == 0);
  }

  TEST_CASE("parse errors and help") {
    CHECK(run({}).code == 14);
    CHECK(run({"bogus"}).code == 14);
    CHECK(run({"flow", "--model", model("bolza.json"), "--t", "-1"}).code == 14);
    CHECK(run({"--help"}).code == 0);
  }

  TEST_CASE("flow columns") {
    const Run r = run({"flow", "--model", model("bolza.json"), "--t", "1", "--sample-step", "0.5"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    REQUIRE(l.size() == 4);
    CHECK(l[0] == "t,x,y,angle,K,ku,ks");
  }

  TEST_CASE("orbits enumerate with config file and json") {
    const std::string path = "cli_test_config.json";
    {
      std::ofstream f(path);
      f << R"({"model":")" << model("bolza.json") << R"(","max_word_len":1,"format":"json"})";
    }
    const Run r = run({"orbits", "enumerate", "--config", path});
    std::remove(path.c_str());
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    REQUIRE(doc.is_array());
    CHECK(doc.size() == 8);
    for (const auto& row : doc) CHECK(row["length"].get<double>() == doctest::Approx(3.0571421).epsilon(1e-6));
  }

  TEST_CASE("flag overrides config") {
    const std::string path = "cli_test_config2.json";
    {
      std::ofstream f(path);
      f << R"({"max_word_len":1,"format":"json"})";
    }
    const Run r = run({"orbits", "enumerate", "--config", path, "--model", model("bolza.json"), "--format", "csv"});
    std::remove(path.c_str());
    REQUIRE(r.code == 0);
    CHECK(lines(r.out).size() == 9);
  }

  TEST_CASE("gurevich beyond the table") {
    const Run r = run({"pressure", "gurevich", "--model", model("bolza.json"), "--t-grid", "4:8:1",
                       "--max-length", "6"});
    CHECK(r.code == 4);
  }

  TEST_CASE("separated with too few candidates") {
    const Run r = run({"pressure", "separated", "--model", model("bolza.json"), "--t-grid", "3:6:1",
                       "--candidates", "8"});
    CHECK(r.code == 10);
  }
}
