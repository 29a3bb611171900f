// Command-line front end: matrix/signal generation, Poisson simulation,
// single fits, experiment sweeps, the verification suite, and rate tables.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "fluxcs/fluxcs.hpp"

namespace {

using namespace fluxcs;

int cmd_gen_matrix(int n, int p, std::uint64_t seed, const std::string& ensemble, double a_lo,
                   double a_hi, const std::string& out) {
  RawEnsemble raw = ensemble == "uniform" ? sample_uniform_ensemble(n, p, a_lo, a_hi, seed)
                                          : sample_bernoulli_ensemble(n, p, seed);
  const SensingMatrix A = embed_physical(raw);
  save_matrix_csv(A, out);
  const ConstraintReport report = verify_physical(A);
  std::cout << "wrote " << out << "  min_entry=" << format_double(report.min_entry)
            << " max_col_sum=" << format_double(report.max_column_sum)
            << " pass=" << (report.pass() ? "yes" : "no") << "\n";
  return report.pass() ? 0 : 1;
}

int cmd_gen_signal(int p, double q, double r_q, const std::string& basis_name,
                   std::uint64_t seed, const std::string& out) {
  SignalSpec spec;
  spec.p = p;
  spec.q = q;
  spec.r_q = r_q;
  spec.basis = basis_kind_from_string(basis_name);
  spec.seed = seed;
  const OrthonormalBasis basis = build_basis(spec.basis, p);
  const GroundTruth truth = generate_signal(spec, basis);
  save_signal_csv(truth, spec, out);
  const MembershipReport membership = check_membership(truth.f, basis, q, r_q);
  std::cout << "wrote " << out << "  min_f=" << format_double(membership.min_f)
            << " lq_norm_q=" << format_double(membership.lq_norm_q)
            << " pass=" << (membership.pass() ? "yes" : "no") << "\n";
  return membership.pass() ? 0 : 1;
}

int cmd_simulate(const std::string& matrix_path, const std::string& signal_path, double T,
                 std::uint64_t seed, const std::string& out) {
  const SensingMatrix A = load_matrix_csv(matrix_path);
  const auto [truth, spec] = load_signal_csv(signal_path);
  const Observation obs = sample_observation(A, truth.f, T, seed);
  save_observation_csv(obs, out);
  std::cout << "wrote " << out << "  total_counts=" << format_double(obs.counts.sum()) << "\n";
  return 0;
}

int cmd_fit(const std::string& matrix_path, const std::string& signal_path,
            const std::string& obs_path, const std::string& solver,
            const std::string& lambda_strategy, double lambda_value, int folds,
            std::uint64_t seed, const std::string& out, const std::string& coef_out) {
  const SensingMatrix A = load_matrix_csv(matrix_path);
  const auto [truth, spec] = load_signal_csv(signal_path);
  const Observation obs = load_observation_csv(obs_path);
  const auto basis =
      std::make_shared<const OrthonormalBasis>(build_basis(spec.basis, spec.p));
  const ReducedProblem problem(obs.counts, A.entries, basis, obs.intensity);

  double lambda = lambda_value;
  if (lambda_strategy != "value") {
    const int k_raw = effective_sparsity(spec.r_q, spec.q, spec.p, obs.intensity);
    const int k_tilde = std::max(1, std::min(k_raw, spec.p / 2));
    const double delta_hat =
        estimate_upper_rip(A.provenance, *basis, k_tilde, 500, mix64(seed, 4));
    const double lambda_n = theoretical_lambda(obs.intensity, spec.p, delta_hat,
                                               A.provenance.a_lo, A.provenance.a_hi);
    if (lambda_strategy == "theoretical") {
      lambda = lambda_n;
    } else if (lambda_strategy == "cv") {
      std::vector<double> grid(20);
      const double lo = std::log(lambda_n / 30.0), hi = std::log(lambda_n * 30.0);
      for (int g = 0; g < 20; ++g) grid[g] = std::exp(lo + (hi - lo) * g / 19.0);
      lambda = cross_validate(problem, grid, folds, mix64(seed, 5)).lambda_star;
    } else {
      throw std::invalid_argument("unknown lambda strategy: " + lambda_strategy);
    }
  }

  SolverConfig config;
  EstimateResult fit;
  if (solver == "lasso") {
    fit = fit_lasso(problem, lambda, config);
  } else if (solver == "wlasso") {
    fit = fit_weighted_lasso(problem, lambda, Vector::Ones(spec.p - 1), config);
  } else if (solver == "poisson_like") {
    // theoretical/cv lambdas live on the scaled quadratic objective; convert
    // by the local curvature equivalence T/2 (an explicit --lambda passes
    // through unchanged)
    const double equivalence = lambda_strategy == "value" ? 1.0 : obs.intensity / 2.0;
    config.tol *= equivalence;
    fit = fit_poisson_mle_l1(problem, lambda * equivalence, config);
  } else {
    throw std::invalid_argument("unknown solver: " + solver);
  }

  json summary = estimate_to_json(fit);
  summary["solver"] = solver;
  summary["mse_vs_truth"] = (fit.f_hat - truth.f).squaredNorm();
  if (!out.empty()) {
    detail::write_text_file(out, summary.dump(2) + "\n");
    std::cout << "wrote " << out << "\n";
  }
  if (!coef_out.empty()) {
    detail::write_text_file(coef_out, estimate_to_csv(fit));
    std::cout << "wrote " << coef_out << "\n";
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out,
              const std::string& format, int threads_override, std::int64_t seed_override) {
  const json j = json::parse(detail::read_text_file(config_path));
  SweepConfig config = config_from_json(j);
  if (threads_override > 0) config.threads = threads_override;
  if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
  config.validate();
  const SweepResult result = run_sweep(config);
  if (format == "json") {
    emit_json(result, config, out);
  } else {
    emit_csv(result.records, config.axis, out);
  }
  std::cout << "wrote " << out << " (" << result.records.size() << " records)\n";
  return 0;
}

int cmd_verify(int p, int n, double T, double q, double r_q, const std::string& basis_name,
               std::uint64_t seed, const std::string& out) {
  VerifyParams params;
  params.p = p;
  params.n = n;
  params.T = T;
  params.q = q;
  params.r_q = r_q;
  params.basis = basis_kind_from_string(basis_name);
  const VerifyReport report = run_verification_suite(params, seed);
  json items = json::array();
  for (const auto& item : report.items) {
    std::cout << (item.pass ? "[PASS] " : "[FAIL] ") << item.name << "  " << item.detail
              << "\n";
    items.push_back(json{{"name", item.name}, {"pass", item.pass}, {"detail", item.detail}});
  }
  if (!out.empty())
    detail::write_text_file(out, json{{"items", items}, {"pass", report.pass()}}.dump(2) + "\n");
  std::cout << (report.pass() ? "all checks passed" : "CHECK FAILURES PRESENT") << "\n";
  return report.pass() ? 0 : 1;
}

int cmd_rates(int p, int n, double T, double q, double r_q, double delta, double a_lo,
              double a_hi, const std::string& basis_name, const std::string& out,
              const std::string& format) {
  RateParams params;
  params.p = p;
  params.n = n;
  params.T = T;
  params.q = q;
  params.r_q = r_q;
  params.delta = delta;
  params.a_lo = a_lo;
  params.a_hi = a_hi;
  params.basis = basis_kind_from_string(basis_name);
  const RegimeReport regime = regime_flags(params);
  const WlassoComparison wlasso = wlasso_rate_comparison(params);
  const NoiseEquivalence noise = noise_equivalence(n, T);
  json j{{"p", p},
         {"n", n},
         {"T", T},
         {"q", q},
         {"r_q", r_q},
         {"delta", delta},
         {"basis", basis_name},
         {"k_tilde", regime.k_tilde},
         {"upper_rate", upper_rate(params)},
         {"minimax_lower_rate", minimax_lower_rate(params)},
         {"lambda_n", theoretical_lambda(T, p, delta, a_lo, a_hi)},
         {"snr_ok", regime.snr_ok},
         {"design_ok", regime.design_ok},
         {"match_lower", regime.match_lower},
         {"match_lower_applicable", regime.match_lower_applicable},
         {"match_upper", regime.match_upper},
         {"wlasso_rate", wlasso.wlasso_rate},
         {"wlasso_over_lasso", wlasso.ratio},
         {"sigma_sq_eff", noise.sigma_sq_eff}};
  std::string text;
  if (format == "csv") {
    std::ostringstream csv;
    csv << "key,value\n";
    for (const auto& [key, value] : j.items()) csv << key << ',' << value.dump() << '\n';
    text = csv.str();
  } else {
    text = j.dump(2) + "\n";
  }
  if (!out.empty()) {
    detail::write_text_file(out, text);
    std::cout << "wrote " << out << "\n";
  } else {
    std::cout << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flux-constrained Poisson compressed sensing under lq-ball sparsity"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out, format = "csv", config_path;

  // gen-matrix
  auto* gen_matrix = app.add_subcommand("gen-matrix", "generate a physical sensing matrix");
  int gm_n = 400, gm_p = 256;
  std::string gm_ensemble = "bernoulli";
  double gm_alo = -1.0, gm_ahi = 1.0;
  gen_matrix->add_option("--n", gm_n, "rows");
  gen_matrix->add_option("--p", gm_p, "columns");
  gen_matrix->add_option("--ensemble", gm_ensemble, "bernoulli|uniform");
  gen_matrix->add_option("--a-lo", gm_alo, "raw ensemble lower bound");
  gen_matrix->add_option("--a-hi", gm_ahi, "raw ensemble upper bound");
  gen_matrix->add_option("--seed", seed, "seed");
  gen_matrix->add_option("--out", out, "output CSV path")->required();

  // gen-signal
  auto* gen_signal = app.add_subcommand("gen-signal", "generate a ground-truth signal");
  int gs_p = 256;
  double gs_q = 0.5, gs_rq = 2.0;
  std::string gs_basis = "dct";
  gen_signal->add_option("--p", gs_p, "dimension");
  gen_signal->add_option("--q", gs_q, "lq exponent in (0,1]");
  gen_signal->add_option("--rq", gs_rq, "lq ball radius");
  gen_signal->add_option("--basis", gs_basis, "dct|dht|dwt_haar");
  gen_signal->add_option("--seed", seed, "seed");
  gen_signal->add_option("--out", out, "output CSV path")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "draw Poisson counts y ~ Poisson(T A f)");
  std::string sim_matrix, sim_signal;
  double sim_T = 1e7;
  simulate->add_option("--matrix", sim_matrix, "matrix CSV")->required();
  simulate->add_option("--signal", sim_signal, "signal CSV")->required();
  simulate->add_option("--T", sim_T, "intensity");
  simulate->add_option("--seed", seed, "seed");
  simulate->add_option("--out", out, "output CSV path")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "solve the pinned-coordinate estimators");
  std::string fit_matrix, fit_signal, fit_obs, fit_solver = "lasso";
  std::string fit_strategy = "theoretical", fit_coef_out;
  double fit_lambda = 0.0;
  int fit_folds = 5;
  fit->add_option("--matrix", fit_matrix, "matrix CSV")->required();
  fit->add_option("--signal", fit_signal, "signal CSV")->required();
  fit->add_option("--obs", fit_obs, "observation CSV")->required();
  fit->add_option("--solver", fit_solver, "lasso|wlasso|poisson_like");
  fit->add_option("--lambda-strategy", fit_strategy, "theoretical|cv|value");
  fit->add_option("--lambda", fit_lambda, "lambda for --lambda-strategy value");
  fit->add_option("--folds", fit_folds, "CV folds");
  fit->add_option("--seed", seed, "seed");
  fit->add_option("--out", out, "summary JSON path");
  fit->add_option("--coef-out", fit_coef_out, "coefficient CSV path");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run an MSE sweep from a JSON config");
  int sweep_threads = 0;
  std::int64_t sweep_seed = -1;
  sweep->add_option("--config", config_path, "sweep config JSON")->required();
  sweep->add_option("--out", out, "output path")->required();
  sweep->add_option("--format", format, "csv|json");
  sweep->add_option("--threads", sweep_threads, "worker threads (overrides config)");
  sweep->add_option("--seed", sweep_seed, "master seed (overrides config)");

  // verify
  auto* verify = app.add_subcommand("verify", "run the verification suite");
  int v_p = 256, v_n = 400;
  double v_T = 1e7, v_q = 0.5, v_rq = 2.0;
  std::string v_basis = "dct";
  verify->add_option("--p", v_p, "dimension");
  verify->add_option("--n", v_n, "rows");
  verify->add_option("--T", v_T, "intensity");
  verify->add_option("--q", v_q, "lq exponent");
  verify->add_option("--rq", v_rq, "ball radius");
  verify->add_option("--basis", v_basis, "dct|dht|dwt_haar");
  verify->add_option("--seed", seed, "seed");
  verify->add_option("--out", out, "report JSON path");

  // rates
  auto* rates = app.add_subcommand("rates", "closed-form rates and regime flags");
  int r_p = 1024, r_n = 1000;
  double r_T = 1e8, r_q_exp = 0.5, r_rq = 7.0, r_delta = 0.5, r_alo = -1.0, r_ahi = 1.0;
  std::string r_basis = "dct";
  rates->add_option("--p", r_p, "dimension");
  rates->add_option("--n", r_n, "rows");
  rates->add_option("--T", r_T, "intensity");
  rates->add_option("--q", r_q_exp, "lq exponent");
  rates->add_option("--rq", r_rq, "ball radius");
  rates->add_option("--delta", r_delta, "upper-RIP excess");
  rates->add_option("--a-lo", r_alo, "ensemble lower bound");
  rates->add_option("--a-hi", r_ahi, "ensemble upper bound");
  rates->add_option("--basis", r_basis, "dct|dht|dwt_haar");
  rates->add_option("--out", out, "output path");
  rates->add_option("--format", format, "csv|json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_matrix->parsed())
      return cmd_gen_matrix(gm_n, gm_p, seed, gm_ensemble, gm_alo, gm_ahi, out);
    if (gen_signal->parsed()) return cmd_gen_signal(gs_p, gs_q, gs_rq, gs_basis, seed, out);
    if (simulate->parsed()) return cmd_simulate(sim_matrix, sim_signal, sim_T, seed, out);
    if (fit->parsed())
      return cmd_fit(fit_matrix, fit_signal, fit_obs, fit_solver, fit_strategy, fit_lambda,
                     fit_folds, seed, out, fit_coef_out);
    if (sweep->parsed()) return cmd_sweep(config_path, out, format, sweep_threads, sweep_seed);
    if (verify->parsed()) return cmd_verify(v_p, v_n, v_T, v_q, v_rq, v_basis, seed, out);
    if (rates->parsed())
      return cmd_rates(r_p, r_n, r_T, r_q_exp, r_rq, r_delta, r_alo, r_ahi, r_basis, out,
                       format);
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
