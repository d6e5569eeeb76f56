#include "tauspec/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <set>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "tauspec/error.hpp"
#include "tauspec/filterbank.hpp"
#include "tauspec/log.hpp"
#include "tauspec/random_models.hpp"

namespace tauspec {

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw InputError("experiment config: " + what);
  };
  if (m < 1) fail("m must be >= 1");
  if (n_list.empty()) fail("N_list is empty");
  if (runs < 1) fail("runs must be >= 1");
  if (nu_list.empty()) fail("nu_list is empty");
  if (shaping_order < 1) fail("shaping_order must be >= 1");
  if (prior_order < 1) fail("prior_order must be >= 1");
  if (p < 1) fail("p must be >= 1");
  if (grid_size < 8 || grid_size % 2 != 0) fail("K must be even and >= 8");
  if (burn_in < 0) fail("burn_in must be >= 0");
  if (!(solver.tolerance > 0.0) || solver.max_iterations < 1)
    fail("solver tolerance and iteration limit must be positive");
  for (int n : n_list) {
    if (n <= p) fail("every N must exceed p");
    if (!prior_from_truth && n <= 10 * prior_order * m)
      fail("every N must exceed 10 * prior_order * m for the prior fit");
  }
}

io::Json ExperimentConfig::to_json() const {
  io::Json j = io::Json::object();
  j["m"] = m;
  j["N_list"] = n_list;
  j["runs"] = runs;
  io::Json nus = io::Json::array();
  for (const auto& o : nu_list) {
    if (o.is_infinite())
      nus.push_back("inf");
    else
      nus.push_back(o.nu());
  }
  j["nu_list"] = nus;
  j["shaping_order"] = shaping_order;
  j["prior_order"] = prior_order;
  j["p"] = p;
  j["K"] = grid_size;
  j["seed"] = seed;
  j["burn_in"] = burn_in;
  j["prior_from_truth"] = prior_from_truth;
  j["tol"] = solver.tolerance;
  j["max_iter"] = solver.max_iterations;
  j["covfit_max_iter"] = covfit.max_iterations;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const io::Json& value) {
  if (!value.is_object()) throw InputError("experiment config must be a JSON object");
  static const std::set<std::string> known{
      "m",     "N_list",  "runs",    "nu_list",          "shaping_order",
      "prior_order", "p", "K",       "seed",             "burn_in",
      "prior_from_truth", "tol",     "max_iter",         "covfit_max_iter"};
  for (auto it = value.begin(); it != value.end(); ++it)
    if (!known.count(it.key()))
      throw InputError("experiment config: unknown key '" + it.key() + "'");
  ExperimentConfig c;
  try {
    if (value.contains("m")) c.m = value["m"].get<int>();
    if (value.contains("N_list")) c.n_list = value["N_list"].get<std::vector<int>>();
    if (value.contains("runs")) c.runs = value["runs"].get<int>();
    if (value.contains("nu_list")) {
      c.nu_list.clear();
      for (const auto& v : value["nu_list"]) {
        if (v.is_string() && v.get<std::string>() == "inf")
          c.nu_list.push_back(EstimatorOrder::infinite());
        else
          c.nu_list.push_back(EstimatorOrder::finite(v.get<int>()));
      }
    }
    if (value.contains("shaping_order")) c.shaping_order = value["shaping_order"].get<int>();
    if (value.contains("prior_order")) c.prior_order = value["prior_order"].get<int>();
    if (value.contains("p")) c.p = value["p"].get<int>();
    if (value.contains("K")) c.grid_size = value["K"].get<int>();
    if (value.contains("seed")) c.seed = value["seed"].get<std::uint64_t>();
    if (value.contains("burn_in")) c.burn_in = value["burn_in"].get<int>();
    if (value.contains("prior_from_truth"))
      c.prior_from_truth = value["prior_from_truth"].get<bool>();
    if (value.contains("tol")) c.solver.tolerance = value["tol"].get<double>();
    if (value.contains("max_iter")) c.solver.max_iterations = value["max_iter"].get<int>();
    if (value.contains("covfit_max_iter"))
      c.covfit.max_iterations = value["covfit_max_iter"].get<int>();
  } catch (const io::Json::exception& e) {
    throw InputError(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

SimulatedProcess simulate_process(int m, int shaping_order, int count,
                                  std::uint64_t seed, int burn_in) {
  if (shaping_order < 1) throw InputError("shaping order must be >= 1");
  Rng filter_rng(derive_seed(seed, 0));
  SpectralFactor truth = random_shaping_filter(m, shaping_order, filter_rng);
  Rng noise_rng(derive_seed(seed, 1));
  Matrix data = simulate_output(truth, count, noise_rng, burn_in);
  return {std::move(data), std::move(truth)};
}

SpectralFactor fit_prior(const Matrix& data, int m, int prior_order) {
  if (data.rows() != m) throw InputError("data must have m rows");
  if (prior_order < 1) throw InputError("prior order must be >= 1");
  const int n = static_cast<int>(data.cols());
  const int p = prior_order;
  if (n <= 10 * p * m)
    throw InputError("record too short for the prior order (need N > 10 p m)");

  const int t = n - p;
  Matrix regressors(m * p, t);
  for (int i = 0; i < p; ++i)
    regressors.middleRows(i * m, m) = data.middleCols(p - 1 - i, t);
  const Matrix targets = data.middleCols(p, t);

  Matrix normal = regressors * regressors.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(normal, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 1e-12 * eig.eigenvalues().maxCoeff()) {
    warn("VAR regression is rank deficient; adding ridge 1e-8 * trace");
    normal.diagonal().array() += 1e-8 * normal.trace();
  }
  Matrix coef =
      normal.llt().solve(regressors * targets.transpose()).transpose();

  Matrix companion = Matrix::Zero(m * p, m * p);
  companion.topRows(m) = coef;
  if (p > 1) companion.bottomLeftCorner(m * (p - 1), m * (p - 1)).setIdentity();
  const double rho = spectral_radius(companion);
  if (rho >= 1.0) {
    warn("VAR estimate is unstable (spectral radius " + std::to_string(rho) +
         "); contracting its poles to radius 0.98");
    const double shrink = 0.98 / rho;
    for (int i = 0; i < p; ++i)
      coef.middleCols(i * m, m) *= std::pow(shrink, i + 1);
    companion.topRows(m) = coef;
  }

  const Matrix residuals = targets - coef * regressors;
  const Matrix omega = residuals * residuals.transpose() / static_cast<double>(t);
  Eigen::LLT<Matrix> chol(omega);
  if (chol.info() != Eigen::Success)
    throw DomainError("VAR innovation covariance is not positive definite");
  const Matrix l = chol.matrixL();

  StateSpaceModel model;
  model.A = companion;
  model.B = Matrix::Zero(m * p, m);
  model.B.topRows(m) = l;
  model.C = coef;
  model.D = l;
  return SpectralFactor(std::move(model));
}

double relative_error(const GridSpectrum& phi_hat, const GridSpectrum& phi) {
  require_same_grid(phi_hat, phi);
  double total = 0.0;
  for (int k = 0; k < phi.size(); ++k) {
    Eigen::SelfAdjointEigenSolver<CMatrix> truth(phi[k], Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<CMatrix> diff(phi_hat[k] - phi[k],
                                                Eigen::EigenvaluesOnly);
    const double denom = truth.eigenvalues().cwiseAbs().maxCoeff();
    if (!(denom > 0.0)) throw DomainError("reference spectrum vanishes at a node");
    total += diff.eigenvalues().cwiseAbs().maxCoeff() / denom;
  }
  return total / phi.size();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const FrequencyGrid grid(config.grid_size);
  const FilterBank bank = build_toeplitz_bank(config.m, config.p);
  Rng truth_rng(derive_seed(config.seed, kTruthStream));
  SpectralFactor truth =
      random_shaping_filter(config.m, config.shaping_order, truth_rng);
  const GridSpectrum phi_truth = factor_to_spectrum(truth, grid);

  ExperimentResult result{config, truth, {}};
  for (std::size_t i = 0; i < config.n_list.size(); ++i) {
    const int count = config.n_list[i];
    for (int run = 0; run < config.runs; ++run) {
      const std::uint64_t seed = derive_seed(config.seed, i + 1, run);
      Rng rng(seed);
      const Matrix y = simulate_output(truth, count, rng, config.burn_in);
      const CovarianceEstimate sigma_c =
          sample_covariance(simulate_state(bank, y), config.p);
      const SpectralFactor prior = config.prior_from_truth
                                       ? truth
                                       : fit_prior(y, config.m, config.prior_order);
      for (const EstimatorOrder& order : config.nu_list) {
        RunResult r;
        r.count = count;
        r.order = order;
        r.run = run;
        r.seed = seed;
        try {
          const CovFitResult fit =
              fit_covariance(sigma_c, bank, order, config.covfit);
          r.covfit_iterations = fit.iterations;
          const DualSolveReport rep =
              solve(fit.estimate, bank, prior, order, grid, config.solver);
          r.solver_iterations = rep.iterations;
          r.constraint_residual = rep.constraint_residual;
          r.converged = rep.converged && fit.converged;
          r.message = fit.converged ? rep.message : "covfit: " + fit.message;
          r.err = relative_error(rep.phi, phi_truth);
          r.innovation = innovation_spectrum(rep.phi, prior);
        } catch (const DomainError& e) {
          r.err = std::numeric_limits<double>::quiet_NaN();
          r.converged = false;
          r.message = e.what();
          warn("run N=" + std::to_string(count) + " nu=" + order.label() +
               " #" + std::to_string(run) + " failed: " + e.what());
        }
        result.runs.push_back(std::move(r));
      }
    }
  }
  return result;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<ErrorSummary> summarize(const ExperimentResult& result) {
  std::vector<ErrorSummary> out;
  for (int count : result.config.n_list)
    for (const EstimatorOrder& order : result.config.nu_list) {
      ErrorSummary s;
      s.count = count;
      s.order = order;
      for (const RunResult& r : result.runs) {
        if (r.count != count || !(r.order == order)) continue;
        if (!r.converged) ++s.non_converged;
        if (std::isfinite(r.err)) s.errors.push_back(r.err);
        s.iterations.push_back(r.solver_iterations);
      }
      s.median = quantile(s.errors, 0.5);
      s.lower_quartile = quantile(s.errors, 0.25);
      s.upper_quartile = quantile(s.errors, 0.75);
      double sum = 0.0;
      for (double e : s.errors) sum += e;
      s.mean = s.errors.empty() ? std::numeric_limits<double>::quiet_NaN()
                                : sum / static_cast<double>(s.errors.size());
      out.push_back(std::move(s));
    }
  return out;
}

void write_experiment(const ExperimentResult& result,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "errors.csv", std::ios::binary);
    if (!f) throw InputError("cannot write " + (dir / "errors.csv").string());
    f << "N,nu,run,err\n";
    for (const RunResult& r : result.runs)
      f << r.count << ',' << r.order.label() << ',' << r.run << ','
        << io::format_number(r.err) << '\n';
  }

  const FrequencyGrid grid(result.config.grid_size);
  const int m = result.config.m;
  for (int count : result.config.n_list)
    for (const EstimatorOrder& order : result.config.nu_list) {
      std::vector<CMatrix> avg(grid.size(), CMatrix::Zero(m, m));
      int used = 0;
      for (const RunResult& r : result.runs) {
        if (r.count != count || !(r.order == order) || !r.innovation) continue;
        for (int k = 0; k < grid.size(); ++k) avg[k] += (*r.innovation)[k];
        ++used;
      }
      if (used == 0) continue;
      for (auto& a : avg) a /= static_cast<double>(used);
      io::write_spectrum_csv(dir / ("innovation_avg_" + std::to_string(count) +
                                    "_" + order.label() + ".csv"),
                             GridSpectrum(grid, std::move(avg)));
    }

  io::Json groups = io::Json::array();
  const auto summaries = summarize(result);
  for (const ErrorSummary& s : summaries) {
    io::Json g = io::Json::object();
    g["N"] = s.count;
    g["nu"] = s.order.label();
    g["runs"] = s.iterations.size();
    g["median"] = s.median;
    g["q1"] = s.lower_quartile;
    g["q3"] = s.upper_quartile;
    g["mean"] = s.mean;
    g["non_converged"] = s.non_converged;
    g["solver_iterations"] = s.iterations;
    groups.push_back(std::move(g));
  }
  io::Json trends = io::Json::array();
  for (const EstimatorOrder& order : result.config.nu_list) {
    io::Json medians = io::Json::array();
    for (const ErrorSummary& s : summaries)
      if (s.order == order) medians.push_back({{"N", s.count}, {"median", s.median}});
    trends.push_back({{"nu", order.label()}, {"medians", medians}});
  }
  io::Json summary = io::Json::object();
  summary["config"] = result.config.to_json();
  summary["truth_states"] = result.truth.states();
  summary["groups"] = groups;
  summary["trend"] = trends;
  io::write_json(dir / "summary.json", summary);
}

}  // namespace tauspec
