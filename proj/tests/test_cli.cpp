#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tauspec/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string output;
};

Outcome run(const fs::path& dir, const std::string& args) {
  const fs::path log = dir / "stdout.txt";
  const std::string command = std::string("\"") + TAUSPEC_CLI_PATH + "\" " + args + " > \"" +
                              log.string() + "\" 2>&1";
  const int status = std::system(command.c_str());
  std::ifstream f(log);
  std::ostringstream s;
  s << f.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tauspec_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("subcommand chain") {
  const fs::path dir = fresh_dir("chain");
  const std::string out = "--out-dir \"" + dir.string() + "\" ";
  auto in = [&](const char* name) { return "\"" + (dir / name).string() + "\""; };

  Outcome r = run(dir, out + "--seed 3 simulate --m 2 --order 4 --N 600 --p 3");
  INFO(r.output);
  REQUIRE(r.code == 0);
  for (const char* f : {"data.csv", "truth.json", "bank.json", "sigma_c.json"})
    CHECK(fs::exists(dir / f));

  r = run(dir, out + "fit-prior --data " + in("data.csv") + " --order 1");
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "prior.json"));

  r = run(dir, out + "covfit --sigma " + in("sigma_c.json") + " --bank " + in("bank.json") +
                   " --nu 2");
  REQUIRE(r.code == 0);
  CHECK(r.output.find("objective ") != std::string::npos);
  const auto fit = tauspec::io::read_json(dir / "sigma_hat.json");
  CHECK(fit["converged"].get<bool>());

  r = run(dir, out + "--grid-size 256 estimate --prior " + in("prior.json") + " --bank " +
                   in("bank.json") + " --sigma " + in("sigma_hat.json") +
                   " --nu 2 --innovation innovation.csv");
  REQUIRE(r.code == 0);
  const auto report = tauspec::io::read_json(dir / "report.json");
  CHECK(report["converged"].get<bool>());
  CHECK(report["constraint_residual"].get<double>() <= 1e-6);
  CHECK(fs::exists(dir / "spectrum.csv"));
  CHECK(fs::exists(dir / "innovation.csv"));

  r = run(dir, out + "divergence --phi " + in("spectrum.csv") + " --psi-factor " +
                   in("prior.json") + " --kind tau --param 0.5");
  REQUIRE(r.code == 0);
  CHECK(r.output.rfind("tau ", 0) == 0);
  CHECK(std::stod(r.output.substr(4)) >= 0.0);
  r = run(dir, out + "divergence --phi " + in("spectrum.csv") + " --psi " + in("spectrum.csv") +
                   " --kind itakura-saito");
  REQUIRE(r.code == 0);
  CHECK(std::abs(std::stod(r.output.substr(r.output.find(' ')))) <= 1e-12);

  // One Newton step cannot reach a 1e-12 residual: non-convergence exit.
  r = run(dir, out + "--grid-size 256 estimate --prior " + in("prior.json") + " --bank " +
                   in("bank.json") + " --sigma " + in("sigma_hat.json") +
                   " --tol 1e-12 --max-iter 1");
  CHECK(r.code == 2);
  fs::remove_all(dir);
}

TEST_CASE("experiment subcommand") {
  const fs::path dir = fresh_dir("experiment");
  const fs::path config = dir / "config.json";
  std::ofstream(config) << R"({"m": 1, "N_list": [120], "runs": 2, "nu_list": [1], "shaping_order": 3, "K": 128})";
  const Outcome r = run(dir, "--out-dir \"" + dir.string() + "\" --config \"" + config.string() +
                                 "\" experiment --nu 1 2");
  INFO(r.output);
  REQUIRE(r.code == 0);
  CHECK(r.output.find("N=120 nu=2") != std::string::npos);
  CHECK(fs::exists(dir / "errors.csv"));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "innovation_avg_120_2.csv"));
  fs::remove_all(dir);
}

TEST_CASE("input errors exit with status 1") {
  const fs::path dir = fresh_dir("errors");
  CHECK(run(dir, "").code == 1);
  CHECK(run(dir, "nonsense").code == 1);
  CHECK(run(dir, "covfit --sigma missing.json --bank missing.json").code == 1);
  CHECK(run(dir, "simulate --order 0 --out-dir \"" + dir.string() + "\"").code == 1);
  const fs::path config = dir / "config.json";
  std::ofstream(config) << R"({"unknown": 1})";
  CHECK(run(dir, "--config \"" + config.string() + "\" experiment").code == 1);
  CHECK(run(dir, "--help").code == 0);
  fs::remove_all(dir);
}
