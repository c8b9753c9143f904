#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const std::string kCli = FUSIONCURVE_CLI;
const std::string kToys = FUSIONCURVE_TOYS;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string run_stderr(const std::string& args) {
  const auto log = fs::temp_directory_path() / "fusioncurve_cli_stderr.txt";
  std::system((kCli + " " + args + " >/dev/null 2>" + log.string()).c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path tmp(const std::string& name) { return fs::temp_directory_path() / ("fusioncurve_cli_" + name); }

}  // namespace

TEST_CASE("cli: help and usage") {
  CHECK(run("--help") == 0);
  CHECK(run("estimate --help") == 0);
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("estimate --threads notanumber") == 2);
}

TEST_CASE("cli: gateaux-check exit codes") {
  CHECK(run("gateaux-check " + kToys + "/censoring.json " + kToys + "/no_censoring.json") == 0);
  CHECK(run("gateaux-check " + kToys + "/zero_cell.json") == 2);
  CHECK(run_stderr("gateaux-check " + kToys + "/zero_cell.json").find("PositivityViolated") != std::string::npos);
  CHECK(run("gateaux-check /nonexistent.json") == 2);
}

TEST_CASE("cli: estimate writes its outputs") {
  const auto out = tmp("estimate");
  fs::remove_all(out);
  CHECK(run("estimate --config " + kToys + "/sample.ini --out " + out.string() + " --grid 1,3,5") == 0);
  for (const char* f : {"curve.csv", "curve.json", "eif.csv", "report.txt"}) CHECK(fs::exists(out / f));
}

TEST_CASE("cli: configuration and data errors exit with 2") {
  CHECK(run("estimate --config /nonexistent.ini") == 2);
  CHECK(run("estimate --config " + kToys + "/sample.ini --grid 1,99 --out " + tmp("beyond").string()) == 3);
  CHECK(run("estimate --config " + kToys + "/sample.ini --rho -1") == 2);

  const auto ini = tmp("missing.ini");
  std::ofstream(ini) << "[data]\nhistorical = " << FUSIONCURVE_TEST_DATA << "/missing_x3_historical.csv\n"
                     << "bridging = " << kToys << "/sample_bridging.csv\ncovariates = x1,x2,x3,x4,x5,x6\n";
  CHECK(run("estimate --config " + ini.string()) == 2);
  const auto err = run_stderr("estimate --config " + ini.string());
  CHECK(err.find("MissingColumn") != std::string::npos);
  CHECK(err.find("x3") != std::string::npos);

  CHECK(run("ncde-test --config " + kToys + "/ncde.ini --t-star 99") == 2);
  CHECK(run("ncde-test --config " + kToys + "/ncde.ini --bootstrap 50") == 2);
}

TEST_CASE("cli: too few events is an estimation error") {
  CHECK(run("ncde-test --config " + kToys + "/ncde.ini --t-star 0.001 --out " + tmp("ncde").string()) == 3);
}
