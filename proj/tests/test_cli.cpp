#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path = fs::temp_directory_path() / ("qdro_cli_" + std::to_string(std::random_device{}()));
  TempDir() { fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + QDRO_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

TEST_CASE("solve writes the experiment-1 solution") {
  TempDir tmp;
  const auto out = tmp.path / "sol.json";
  CHECK(run("solve --p-hat 0.00,0.15,0.15,0.30,0.40 --eps 0.2 --q 2 --output " + out.string()) == 0);
  const auto j = read_json(out);
  CHECK(j["x"][0].get<double>() == doctest::Approx(0.1342).epsilon(1e-2));
  CHECK(j["status"] == "Converged");
}

TEST_CASE("solve exit codes") {
  CHECK(run("solve --p-hat 0.5,0.5 --eps -1 --q 2") == 1);
  CHECK(run("solve --p-hat 0.6,0.6 --eps 0.1 --q 2") == 1);
  CHECK(run("solve --p-hat 0.5,0.5 --eps 0.1 --q 0.5") == 1);
  CHECK(run("solve --bogus") == 1);

  TempDir tmp;
  const auto out = tmp.path / "wide.json";
  CHECK(run("solve --p-hat 0.1,0.2,0.3,0.4 --eps 5 --q 2 --output " + out.string()) == 0);
  const auto j = read_json(out);
  CHECK(j["degenerate"] == true);
  for (const auto& v : j["x"]) CHECK(v.get<double>() == 0.25);
}

TEST_CASE("solve reads an instance file and flags override it") {
  TempDir tmp;
  const auto inst = tmp.path / "inst.json";
  std::ofstream(inst) << R"({"p_hat":[0.0,0.2,0.3,0.5],"epsilon":0.2,"q":"inf"})";
  const auto out = tmp.path / "sol.json";
  CHECK(run("solve --instance " + inst.string() + " --output " + out.string()) == 0);
  CHECK(read_json(out)["x"][1].get<double>() == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(run("solve --instance " + inst.string() + " --eps 5 --output " + out.string()) == 0);
  CHECK(read_json(out)["degenerate"] == true);
  CHECK(run("solve --instance " + (tmp.path / "missing.json").string()) == 1);
}

TEST_CASE("certify exit codes") {
  TempDir tmp;
  const auto sol = tmp.path / "sol.json";
  const std::string inst = "--p-hat 0.00,0.15,0.15,0.30,0.40 --eps 0.2 --q 2";
  REQUIRE(run("solve " + inst + " --output " + sol.string()) == 0);
  CHECK(run("certify " + inst + " --solution " + sol.string()) == 0);

  auto j = read_json(sol);
  j["x"] = json::array({0.15, 0.17, 0.17, 0.23, 0.28});
  std::ofstream(tmp.path / "bad.json") << j.dump();
  CHECK(run("certify " + inst + " --solution " + (tmp.path / "bad.json").string()) == 3);

  const std::string wide = "--p-hat 0.1,0.2,0.3,0.4 --eps 5 --q 2";
  REQUIRE(run("solve " + wide + " --output " + (tmp.path / "wide.json").string()) == 0);
  const auto cert = tmp.path / "cert.json";
  CHECK(run("certify " + wide + " --solution " + (tmp.path / "wide.json").string() + " --output " + cert.string()) ==
        0);
  const auto c = read_json(cert);
  CHECK(c.dump().find("\"assumption1\":false") != std::string::npos);
}

TEST_CASE("laplace and axioms subcommands") {
  TempDir tmp;
  const auto out = tmp.path / "lap.json";
  CHECK(run("laplace --p-hat 0,1 --c 1 --output " + out.string()) == 0);
  const auto j = read_json(out);
  CHECK(j.dump().find("0.333") != std::string::npos);
  CHECK(run("laplace --p-hat 0,1 --c 0") == 1);
  CHECK(run("axioms --p-hat 0.0,0.2,0.3,0.5 --x 0.20,0.25,0.25,0.30") == 0);
  CHECK(run("axioms --p-hat 0.00,0.15,0.15,0.30,0.40 --eps 0.2 --q 2 --format json") == 0);
}

TEST_CASE("iteration budget exhaustion maps to exit 2") {
  CHECK(run("solve --p-hat 0.00,0.15,0.15,0.30,0.40 --eps 0.2 --q 2 --max-iterations 1") == 2);
}

TEST_CASE("repro exit codes and format filter") {
  TempDir tmp;
  CHECK(run("repro --out-dir " + (tmp.path / "all").string()) == 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(tmp.path / "all")) {
    const auto ext = e.path().extension();
    if (ext == ".json" || ext == ".csv") ++files;
  }
  CHECK(files == 6);

  CHECK(run("repro --format csv --out-dir " + (tmp.path / "csv").string()) == 0);
  for (const auto& e : fs::directory_iterator(tmp.path / "csv")) CHECK(e.path().extension() == ".csv");

  CHECK(run("repro --max-iterations 1 --out-dir " + (tmp.path / "short").string()) == 4);
}

TEST_CASE("sweep subcommand") {
  TempDir tmp;
  CHECK(run("sweep --p-hat 0.1,0.2,0.3,0.4 --q 2 --eps-grid 0,0.1,0.2 --format csv --out-dir " + tmp.path.string()) ==
        0);
  CHECK(fs::exists(tmp.path / "sweep.csv"));
  CHECK(run("sweep --p-hat 0.1,0.2,0.3,0.4 --q 2 --eps-grid 0.2,0.1 --out-dir " + tmp.path.string()) == 1);
}
