#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tauspec/covfit.hpp"
#include "tauspec/estimator.hpp"
#include "tauspec/io.hpp"
#include "tauspec/order.hpp"
#include "tauspec/state_space.hpp"

namespace tauspec {

struct ExperimentConfig {
  int m = 2;
  std::vector<int> n_list{100, 500};
  int runs = 10;
  std::vector<EstimatorOrder> nu_list{EstimatorOrder::finite(1),
                                      EstimatorOrder::finite(2)};
  int shaping_order = 10;
  int prior_order = 1;
  int p = 4;
  int grid_size = FrequencyGrid::kDefaultSize;
  std::uint64_t seed = 1;
  int burn_in = 1000;
  // Use the true factor as the prior instead of fitting one.
  bool prior_from_truth = false;
  SolveOptions solver;
  CovFitOptions covfit;

  void validate() const;  // InputError on bad values
  io::Json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static ExperimentConfig from_json(const io::Json& value);
};

struct SimulatedProcess {
  Matrix data;  // m x N
  SpectralFactor truth;
};

// The truth factor is drawn from derive_seed(seed, 0) and the driving noise
// from derive_seed(seed, 1).
SimulatedProcess simulate_process(int m, int shaping_order, int count,
                                  std::uint64_t seed, int burn_in = 1000);

// Least-squares VAR(prior_order) prior in canonical state-space form.
SpectralFactor fit_prior(const Matrix& data, int m, int prior_order);

// Grid average of ||phi_hat - phi||_2 / ||phi||_2.
double relative_error(const GridSpectrum& phi_hat, const GridSpectrum& phi);

struct RunResult {
  int count = 0;  // record length N
  EstimatorOrder order = EstimatorOrder::finite(1);
  int run = 0;
  std::uint64_t seed = 0;
  double err = 0.0;
  std::optional<GridSpectrum> innovation;
  int covfit_iterations = 0;
  int solver_iterations = 0;
  double constraint_residual = 0.0;
  bool converged = false;
  std::string message;
};

struct ExperimentResult {
  ExperimentConfig config;
  SpectralFactor truth;
  std::vector<RunResult> runs;  // ordered by N, then run, then nu
};

// Truth filter from derive_seed(seed, kTruthStream); run r at the i-th record
// length draws its noise from derive_seed(seed, i + 1, r).
inline constexpr std::uint64_t kTruthStream = 0;
ExperimentResult run_experiment(const ExperimentConfig& config);

struct ErrorSummary {
  int count = 0;
  EstimatorOrder order = EstimatorOrder::finite(1);
  std::vector<double> errors;
  double median = 0.0;
  double lower_quartile = 0.0;
  double upper_quartile = 0.0;
  double mean = 0.0;
  int non_converged = 0;
  std::vector<int> iterations;
};

// Per (N, nu) statistics in config order. Failed runs (NaN err) are excluded
// from the quantiles and counted in non_converged.
std::vector<ErrorSummary> summarize(const ExperimentResult& result);

// Linear-interpolation quantile of unsorted data.
double quantile(std::vector<double> values, double q);

// errors.csv, innovation_avg_<N>_<nu>.csv and summary.json in `dir`.
void write_experiment(const ExperimentResult& result,
                      const std::filesystem::path& dir);

}  // namespace tauspec
