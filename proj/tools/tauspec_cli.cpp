// Command-line front end: simulate, fit-prior, covfit, estimate, divergence
// and experiment. Exit status 0 on success, 2 when an iterative solver did
// not converge, 1 on invalid input.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tauspec/covfit.hpp"
#include "tauspec/divergences.hpp"
#include "tauspec/error.hpp"
#include "tauspec/estimator.hpp"
#include "tauspec/filterbank.hpp"
#include "tauspec/io.hpp"
#include "tauspec/pipeline.hpp"
#include "tauspec/random_models.hpp"

namespace fs = std::filesystem;
using namespace tauspec;
using io::Json;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNotConverged = 2;

struct Globals {
  int grid_size = FrequencyGrid::kDefaultSize;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string config;
};

fs::path output_path(const Globals& g, const std::string& name) {
  fs::path p(name);
  if (p.is_absolute() || p.has_parent_path()) return p;
  return fs::path(g.out_dir) / p;
}

EstimatorOrder order_from(int nu, bool nu_inf) {
  if (nu_inf) return EstimatorOrder::infinite();
  if (nu < 1) throw InputError("--nu must be a positive integer");
  return EstimatorOrder::finite(nu);
}

void print_line(const std::string& key, double value) {
  std::printf("%s %s\n", key.c_str(), io::format_number(value).c_str());
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  int m = 2;
  int order = 10;
  int count = 500;
  int p = 4;
  int burn_in = 1000;
};

int run_simulate(const Globals& g, const SimulateArgs& a) {
  fs::create_directories(g.out_dir);
  const SimulatedProcess sim = simulate_process(a.m, a.order, a.count, g.seed, a.burn_in);
  const FilterBank bank = build_toeplitz_bank(a.m, a.p);
  const CovarianceEstimate sigma_c =
      sample_covariance(simulate_state(bank, sim.data), a.p);
  io::write_data_csv(output_path(g, "data.csv"), sim.data);
  io::write_model(output_path(g, "truth.json"), sim.truth.realization());
  io::write_bank(output_path(g, "bank.json"), bank);
  io::write_sigma(output_path(g, "sigma_c.json"), sigma_c.sigma);
  std::printf("wrote data.csv truth.json bank.json sigma_c.json to %s\n",
              g.out_dir.c_str());
  return kOk;
}

// ---- fit-prior -------------------------------------------------------------

struct FitPriorArgs {
  std::string data;
  int order = 1;
  std::string out = "prior.json";
};

int run_fit_prior(const Globals& g, const FitPriorArgs& a) {
  const Matrix data = io::read_data_csv(a.data);
  const SpectralFactor prior =
      fit_prior(data, static_cast<int>(data.rows()), a.order);
  io::write_model(output_path(g, a.out), prior.realization());
  return kOk;
}

// ---- covfit ----------------------------------------------------------------

struct CovfitArgs {
  std::string sigma;
  std::string bank;
  int nu = 1;
  bool nu_inf = false;
  std::string out = "sigma_hat.json";
};

int run_covfit(const Globals& g, const CovfitArgs& a) {
  const FilterBank bank = io::read_bank(a.bank);
  const CovarianceEstimate sigma_c{io::read_sigma(a.sigma)};
  const CovFitResult fit =
      fit_covariance(sigma_c, bank, order_from(a.nu, a.nu_inf));
  Json j = Json::object();
  j["sigma"] = io::matrix_to_json(fit.estimate.sigma);
  j["iterations"] = fit.iterations;
  j["gradient_norm"] = fit.gradient_norm;
  j["feasibility_residual"] = fit.estimate.feasibility_residual;
  j["objective"] = fit.objective;
  j["start_objective"] = fit.start_objective;
  j["converged"] = fit.converged;
  j["regularized"] = fit.regularized;
  j["message"] = fit.message;
  io::write_json(output_path(g, a.out), j);
  print_line("objective", fit.objective);
  print_line("feasibility_residual", fit.estimate.feasibility_residual);
  return fit.converged ? kOk : kNotConverged;
}

// ---- estimate --------------------------------------------------------------

struct EstimateArgs {
  std::string prior;
  std::string bank;
  std::string sigma;
  int nu = 2;
  bool nu_inf = false;
  double tol = 1e-6;
  int max_iter = 200;
  std::string out = "spectrum.csv";
  std::string report = "report.json";
  std::string innovation;
};

int run_estimate(const Globals& g, const EstimateArgs& a) {
  const SpectralFactor prior(io::read_model(a.prior));
  const FilterBank bank = io::read_bank(a.bank);
  const Matrix sigma = io::read_sigma(a.sigma);
  CovarianceEstimate sigma_hat{sigma, feasibility_residual(bank, sigma)};
  const FrequencyGrid grid(g.grid_size);
  SolveOptions options;
  options.tolerance = a.tol;
  options.max_iterations = a.max_iter;
  const EstimatorOrder order = order_from(a.nu, a.nu_inf);
  const DualSolveReport rep = solve(sigma_hat, bank, prior, order, grid, options);

  io::write_spectrum_csv(output_path(g, a.out), rep.phi);
  if (!a.innovation.empty())
    io::write_spectrum_csv(output_path(g, a.innovation),
                           innovation_spectrum(rep.phi, prior));
  Json j = Json::object();
  j["nu"] = order.label();
  j["converged"] = rep.converged;
  j["message"] = rep.message;
  j["iterations"] = rep.iterations;
  j["constraint_residual"] = rep.constraint_residual;
  j["gradient_norm"] = rep.gradient_norm;
  j["lambda"] = io::matrix_to_json(rep.lambda.matrix);
  j["lambda_coords"] = std::vector<double>(
      rep.lambda.coords.data(), rep.lambda.coords.data() + rep.lambda.coords.size());
  j["dual_values"] = rep.dual_values;
  j["residual_history"] = rep.residual_history;
  j["step_sizes"] = rep.step_sizes;
  if (rep.degree_bound >= 0)
    j["degree_bound"] = rep.degree_bound;
  else
    j["degree_bound"] = nullptr;
  io::write_json(output_path(g, a.report), j);
  print_line("constraint_residual", rep.constraint_residual);
  std::printf("iterations %d\n", rep.iterations);
  return rep.converged ? kOk : kNotConverged;
}

// ---- divergence ------------------------------------------------------------

struct DivergenceArgs {
  std::string phi;
  std::string psi;
  std::string psi_factor;
  std::string kind = "tau";
  double param = 0.5;
};

int run_divergence(const Globals&, const DivergenceArgs& a) {
  const GridSpectrum phi = io::read_spectrum_csv(a.phi, true);
  std::optional<SpectralFactor> factor;
  if (!a.psi_factor.empty()) factor.emplace(io::read_model(a.psi_factor));
  auto psi_spectrum = [&]() {
    if (!a.psi.empty()) return io::read_spectrum_csv(a.psi, true);
    if (factor) return factor_to_spectrum(*factor, phi.grid());
    throw InputError("--psi or --psi-factor is required");
  };
  auto need_factor = [&]() -> const SpectralFactor& {
    if (!factor) throw InputError("--kind " + a.kind + " needs --psi-factor");
    return *factor;
  };
  double value = 0.0;
  if (a.kind == "tau")
    value = tau_divergence(phi, need_factor(), TauParameter(a.param));
  else if (a.kind == "itakura-saito")
    value = itakura_saito(phi, psi_spectrum());
  else if (a.kind == "kl")
    value = kl_type(phi, need_factor());
  else if (a.kind == "alpha")
    value = alpha_divergence(phi, psi_spectrum(), a.param);
  else if (a.kind == "beta")
    value = beta_divergence(phi, psi_spectrum(), a.param);
  else
    throw InputError("unknown divergence kind '" + a.kind + "'");
  print_line(a.kind, value);
  return kOk;
}

// ---- experiment ------------------------------------------------------------

struct ExperimentArgs {
  std::optional<int> runs;
  std::vector<int> n_list;
  std::vector<std::string> nu_list;
  std::optional<int> shaping_order;
  std::optional<int> prior_order;
  bool prior_from_truth = false;
};

int run_experiment_cmd(const Globals& g, const ExperimentArgs& a,
                       const CLI::App& app, const CLI::App& sub) {
  ExperimentConfig config;
  if (!g.config.empty()) config = ExperimentConfig::from_json(io::read_json(g.config));
  if (app.count("--seed")) config.seed = g.seed;
  if (app.count("--grid-size")) config.grid_size = g.grid_size;
  if (a.runs) config.runs = *a.runs;
  if (!a.n_list.empty()) config.n_list = a.n_list;
  if (!a.nu_list.empty()) {
    config.nu_list.clear();
    for (const auto& s : a.nu_list)
      config.nu_list.push_back(s == "inf" ? EstimatorOrder::infinite()
                                          : EstimatorOrder::finite(std::stoi(s)));
  }
  if (a.shaping_order) config.shaping_order = *a.shaping_order;
  if (a.prior_order) config.prior_order = *a.prior_order;
  if (sub.count("--prior-from-truth")) config.prior_from_truth = a.prior_from_truth;
  config.validate();

  const ExperimentResult result = run_experiment(config);
  write_experiment(result, g.out_dir);
  for (const ErrorSummary& s : summarize(result))
    std::printf("N=%d nu=%s median=%s q1=%s q3=%s non_converged=%d\n", s.count,
                s.order.label().c_str(), io::format_number(s.median).c_str(),
                io::format_number(s.lower_quartile).c_str(),
                io::format_number(s.upper_quartile).c_str(), s.non_converged);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate spectral estimation with tau-divergences"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--grid-size", g.grid_size, "Frequency grid size K")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Master random seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for output files")
      ->capture_default_str();
  app.add_option("--config", g.config, "Experiment configuration JSON");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Draw a random shaping filter and a sample path");
  simulate->add_option("--m", sim.m, "Channels")->capture_default_str();
  simulate->add_option("--order", sim.order, "Shaping filter order")->capture_default_str();
  simulate->add_option("--N", sim.count, "Record length")->capture_default_str();
  simulate->add_option("--p", sim.p, "Toeplitz bank block rows")->capture_default_str();
  simulate->add_option("--burn-in", sim.burn_in, "Discarded initial samples")
      ->capture_default_str();

  FitPriorArgs fp;
  auto* fit = app.add_subcommand("fit-prior", "Fit a VAR prior factor to data");
  fit->add_option("--data", fp.data, "Data CSV (y0,y1,...)")->required();
  fit->add_option("--order", fp.order, "VAR order")->capture_default_str();
  fit->add_option("--out", fp.out, "Output model JSON")->capture_default_str();

  CovfitArgs cf;
  auto* covfit = app.add_subcommand("covfit", "Project a covariance onto the feasible set");
  covfit->add_option("--sigma", cf.sigma, "Covariance JSON")->required();
  covfit->add_option("--bank", cf.bank, "Bank JSON")->required();
  covfit->add_option("--nu", cf.nu, "Order nu")->capture_default_str();
  covfit->add_flag("--nu-inf", cf.nu_inf, "Use the nu = infinity objective");
  covfit->add_option("--out", cf.out, "Output JSON")->capture_default_str();

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Solve the dual problem for a spectrum");
  estimate->add_option("--prior", est.prior, "Prior factor JSON")->required();
  estimate->add_option("--bank", est.bank, "Bank JSON")->required();
  estimate->add_option("--sigma", est.sigma, "Feasible covariance JSON")->required();
  estimate->add_option("--nu", est.nu, "Order nu")->capture_default_str();
  estimate->add_flag("--nu-inf", est.nu_inf, "Use the nu = infinity estimator");
  estimate->add_option("--tol", est.tol, "Constraint tolerance")->capture_default_str();
  estimate->add_option("--max-iter", est.max_iter, "Newton iteration limit")
      ->capture_default_str();
  estimate->add_option("--out", est.out, "Spectrum CSV")->capture_default_str();
  estimate->add_option("--report", est.report, "Report JSON")->capture_default_str();
  estimate->add_option("--innovation", est.innovation,
                       "Also write the normalized innovation spectrum CSV");

  DivergenceArgs dv;
  auto* divergence = app.add_subcommand("divergence", "Divergence between two spectra");
  divergence->add_option("--phi", dv.phi, "Spectrum CSV")->required();
  divergence->add_option("--psi", dv.psi, "Reference spectrum CSV");
  divergence->add_option("--psi-factor", dv.psi_factor, "Reference spectral factor JSON");
  divergence->add_option("--kind", dv.kind, "tau, itakura-saito, kl, alpha or beta")
      ->capture_default_str();
  divergence->add_option("--param", dv.param, "tau, alpha or beta")->capture_default_str();

  ExperimentArgs ex;
  auto* experiment = app.add_subcommand("experiment", "Run the Monte-Carlo study");
  experiment->add_option("--runs", ex.runs, "Runs per record length");
  experiment->add_option("--N", ex.n_list, "Record lengths");
  experiment->add_option("--nu", ex.nu_list, "Estimator orders (integers or inf)");
  experiment->add_option("--shaping-order", ex.shaping_order, "Truth filter order");
  experiment->add_option("--prior-order", ex.prior_order, "VAR prior order");
  experiment->add_flag("--prior-from-truth", ex.prior_from_truth,
                       "Use the true factor as prior");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*simulate) return run_simulate(g, sim);
    if (*fit) return run_fit_prior(g, fp);
    if (*covfit) return run_covfit(g, cf);
    if (*estimate) return run_estimate(g, est);
    if (*divergence) return run_divergence(g, dv);
    if (*experiment) return run_experiment_cmd(g, ex, app, *experiment);
  } catch (const std::exception& e) {
    std::cerr << "tauspec: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
