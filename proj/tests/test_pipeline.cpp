#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/SVD>

#include "tauspec/divergences.hpp"
#include "tauspec/error.hpp"
#include "tauspec/hpd.hpp"
#include "tauspec/pipeline.hpp"
#include "test_support.hpp"

using namespace tauspec;
using namespace tauspec::test;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tauspec_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.m = 1;
  c.n_list = {200};
  c.runs = 1;
  c.nu_list = {EstimatorOrder::finite(1)};
  c.shaping_order = 4;
  c.grid_size = 128;
  c.burn_in = 200;
  return c;
}

}  // namespace

TEST_CASE("config JSON round trip and validation") {
  ExperimentConfig c;
  c.m = 3;
  c.n_list = {150, 700};
  c.runs = 4;
  c.nu_list = {EstimatorOrder::finite(3), EstimatorOrder::infinite()};
  c.seed = 99;
  c.grid_size = 256;
  c.prior_from_truth = true;
  c.solver.tolerance = 1e-8;
  const io::Json j = c.to_json();
  const ExperimentConfig back = ExperimentConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.nu_list[1].is_infinite());
  CHECK(back.n_list == c.n_list);

  // Missing keys keep defaults.
  const ExperimentConfig defaults = ExperimentConfig::from_json(io::Json::object());
  CHECK(defaults.to_json() == ExperimentConfig().to_json());

  CHECK_THROWS_AS(ExperimentConfig::from_json({{"bogus", 1}}), InputError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"runs", 0}}), InputError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"K", 7}}), InputError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"m", "two"}}), InputError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(io::Json::array()), InputError);
  // N must leave room for the VAR fit.
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"N_list", {30}}, {"prior_order", 2}}),
                  InputError);
}

TEST_CASE("simulate_process") {
  const SimulatedProcess a = simulate_process(2, 6, 300, 5, 100);
  const SimulatedProcess b = simulate_process(2, 6, 300, 5, 100);
  CHECK(a.data == b.data);
  CHECK(a.truth.realization().A == b.truth.realization().A);
  CHECK(a.data.rows() == 2);
  CHECK(a.data.cols() == 300);
  CHECK(simulate_process(2, 6, 300, 6, 100).data != a.data);

  CHECK(a.truth.realization().spectral_radius() < 0.96);
  CHECK(spectral_radius(inverse_factor(a.truth).A) < 1.0);
  CHECK(a.truth.is_canonical());
  CHECK_THROWS_AS(simulate_process(2, 0, 10, 1), InputError);

  // Law of large numbers on the zeroth lag.
  const int count = 10000;
  const SimulatedProcess long_run = simulate_process(2, 6, count, 8);
  const Matrix lag0 = long_run.data * long_run.data.transpose() / count;
  const Matrix expected =
      integrate(factor_to_spectrum(long_run.truth, FrequencyGrid(1024))).real();
  CHECK((lag0 - expected).norm() <= 0.2 * expected.norm());
}

TEST_CASE("fit_prior on white noise") {
  Rng rng = make_rng(51);
  const Matrix y = 2.0 * gaussian_matrix(2, 10000, rng);
  const SpectralFactor prior = fit_prior(y, 2, 1);
  const StateSpaceModel& w = prior.realization();
  CHECK(w.C.norm() <= 0.1);
  CHECK(max_abs(Matrix(w.D - 2.0 * Matrix::Identity(2, 2))) <= 0.2);
  CHECK(prior.is_canonical());
  CHECK(factor_to_spectrum(prior, FrequencyGrid(256)).min_eigenvalue() > 0.0);

  CHECK_THROWS_AS(fit_prior(y.leftCols(20), 2, 1), InputError);
  CHECK_THROWS_AS(fit_prior(y, 3, 1), InputError);
  CHECK_THROWS_AS(fit_prior(y, 2, 0), InputError);
}

TEST_CASE("fit_prior recovers a VAR(1) and beats a white prior") {
  // y_k = a y_{k-1} + e_k: the least-squares coefficient converges to a.
  Rng rng = make_rng(52);
  Matrix a(2, 2);
  a << 0.6, 0.2, -0.1, 0.4;
  Matrix y = Matrix::Zero(2, 20000);
  const Matrix e = gaussian_matrix(2, 20000, rng);
  for (int k = 1; k < y.cols(); ++k) y.col(k) = a * y.col(k - 1) + e.col(k);
  const SpectralFactor var = fit_prior(y, 2, 1);
  CHECK(max_abs(Matrix(var.realization().A - a)) <= 0.05);

  const FrequencyGrid grid(512);
  const SimulatedProcess sim = simulate_process(2, 6, 2000, 53);
  const GridSpectrum truth = factor_to_spectrum(sim.truth, grid);
  const SpectralFactor fitted = fit_prior(sim.data, 2, 2);
  const GridSpectrum white = constant_spectrum(grid, Matrix::Identity(2, 2));
  const double s_fitted = itakura_saito(truth, factor_to_spectrum(fitted, grid));
  const double s_white = itakura_saito(truth, white);
  CHECK(std::isfinite(s_fitted));
  CHECK(s_fitted < s_white);
}

TEST_CASE("relative_error") {
  const FrequencyGrid grid(128);
  Rng rng = make_rng(54);
  const GridSpectrum phi = factor_to_spectrum(random_factor(2, 3, rng), grid);
  CHECK(relative_error(phi, phi) == 0.0);

  std::vector<CMatrix> doubled;
  for (int k = 0; k < grid.size(); ++k) doubled.push_back(2.0 * phi[k]);
  CHECK(relative_error(GridSpectrum(grid, doubled), phi) == doctest::Approx(1.0).epsilon(1e-14));

  const GridSpectrum other = factor_to_spectrum(random_factor(2, 3, rng), grid);
  double oracle = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    Eigen::JacobiSVD<CMatrix> diff(CMatrix(other[k] - phi[k]));
    Eigen::JacobiSVD<CMatrix> ref(phi[k]);
    oracle += diff.singularValues()(0) / ref.singularValues()(0);
  }
  oracle /= grid.size();
  CHECK(std::abs(relative_error(other, phi) - oracle) <= 1e-12);
  CHECK_THROWS_AS(relative_error(other, factor_to_spectrum(random_factor(2, 3, rng),
                                                           FrequencyGrid(64))),
                  InputError);
}

TEST_CASE("quantile") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({4.0, 1.0, 2.0, 3.0}, 0.5) == 2.5);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
  CHECK(quantile({1.0, 2.0}, 0.0) == 1.0);
  CHECK(quantile({1.0, 2.0}, 1.0) == 2.0);
  CHECK(std::isnan(quantile({}, 0.5)));
}

TEST_CASE("experiment smoke run") {
  const ExperimentResult result = run_experiment(small_config());
  REQUIRE(result.runs.size() == 1);
  const RunResult& r = result.runs[0];
  CHECK(r.converged);
  CHECK(std::isfinite(r.err));
  CHECK(r.err >= 0.0);
  CHECK(r.innovation.has_value());
  CHECK(r.seed == derive_seed(1, 1, 0));
}

TEST_CASE("true prior: error shrinks with the record length") {
  ExperimentConfig c;
  c.m = 2;
  c.n_list = {100, 2000};
  c.runs = 10;
  c.nu_list = {EstimatorOrder::finite(2)};
  c.shaping_order = 4;
  c.grid_size = 256;
  c.prior_from_truth = true;
  c.seed = 7;
  const auto summaries = summarize(run_experiment(c));
  REQUIRE(summaries.size() == 2);
  CHECK(summaries[0].non_converged == 0);
  CHECK(summaries[1].non_converged == 0);
  CHECK(summaries[1].median < summaries[0].median);
}

TEST_CASE("experiment outputs") {
  ExperimentConfig c = small_config();
  c.m = 2;
  c.n_list = {150, 300};
  c.runs = 2;
  c.nu_list = {EstimatorOrder::finite(1), EstimatorOrder::finite(2)};
  const ExperimentResult result = run_experiment(c);
  CHECK(result.runs.size() == 8);
  // Ordered by N, then run, then nu.
  CHECK(result.runs[0].count == 150);
  CHECK(result.runs[1].order == EstimatorOrder::finite(2));
  CHECK(result.runs[2].run == 1);
  CHECK(result.runs[4].count == 300);

  const fs::path first = scratch_dir("a"), second = scratch_dir("b");
  write_experiment(result, first);
  write_experiment(run_experiment(c), second);
  const char* names[] = {"errors.csv", "summary.json", "innovation_avg_150_1.csv",
                         "innovation_avg_150_2.csv", "innovation_avg_300_1.csv",
                         "innovation_avg_300_2.csv"};
  for (const char* name : names) {
    INFO(name);
    REQUIRE(fs::exists(first / name));
    CHECK(slurp(first / name) == slurp(second / name));
  }

  std::istringstream errors(slurp(first / "errors.csv"));
  std::string line;
  std::getline(errors, line);
  CHECK(line == "N,nu,run,err");
  int rows = 0;
  while (std::getline(errors, line)) {
    CHECK(std::stod(line.substr(line.rfind(',') + 1)) >= 0.0);
    ++rows;
  }
  CHECK(rows == 8);

  const GridSpectrum avg = io::read_spectrum_csv(first / "innovation_avg_300_2.csv");
  CHECK(avg.dim() == 2);
  for (int k = 0; k < avg.size(); ++k) {
    CHECK(max_abs(CMatrix(avg[k] - avg[k].adjoint())) <= 1e-12);
    CHECK(hermitian_eigen(avg[k]).values.minCoeff() >= -1e-12);
  }

  const io::Json summary = io::read_json(first / "summary.json");
  CHECK(summary["groups"].size() == 4);
  CHECK(summary["config"] == c.to_json());
  CHECK(summary["groups"][0]["solver_iterations"].size() == 2);
  fs::remove_all(first);
  fs::remove_all(second);
}
