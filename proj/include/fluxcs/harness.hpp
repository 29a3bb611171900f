#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "fluxcs/basis.hpp"
#include "fluxcs/io.hpp"
#include "fluxcs/model.hpp"
#include "fluxcs/sensing.hpp"
#include "fluxcs/signal.hpp"
#include "fluxcs/solver.hpp"
#include "fluxcs/theory.hpp"

namespace fluxcs {

enum class SweepAxis { n, T, q };
enum class LambdaStrategy { theoretical, cv, fixed };
enum class EnsembleKind { bernoulli, uniform };

inline const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::n: return "n";
    case SweepAxis::T: return "T";
    case SweepAxis::q: return "q";
  }
  return "?";
}

inline const char* to_string(LambdaStrategy s) {
  switch (s) {
    case LambdaStrategy::theoretical: return "theoretical";
    case LambdaStrategy::cv: return "cv";
    case LambdaStrategy::fixed: return "fixed";
  }
  return "?";
}

struct FixedParams {
  int p = 256;
  int n = 400;
  double T = 1e7;
  double q = 0.5;
  double r_q = 2.0;
  BasisKind basis = BasisKind::dct;
  double a_lo = -1.0;
  double a_hi = 1.0;
  EnsembleKind ensemble = EnsembleKind::bernoulli;
};

struct SweepConfig {
  SweepAxis axis = SweepAxis::T;
  std::vector<double> grid;
  FixedParams fixed;
  int trials = 10;
  int folds = 5;
  LambdaStrategy lambda_strategy = LambdaStrategy::theoretical;
  double lambda_value = 0.0;  // used by LambdaStrategy::fixed
  std::vector<std::string> solvers = {"lasso"};
  std::string weights_source;  // optional weights file for wlasso
  std::uint64_t seed = 1;
  int threads = 1;
  int rip_trials = 500;
  int cv_grid_size = 20;
  double cv_span = 30.0;  // CV grid spans [lambda_n/span, span*lambda_n]
  SolverConfig solver;

  void validate() const {
    if (grid.empty()) throw std::invalid_argument("SweepConfig: grid must be non-empty");
    if (trials < 1) throw std::invalid_argument("SweepConfig: trials must be >= 1");
    if (folds < 2) throw std::invalid_argument("SweepConfig: folds must be >= 2");
    if (solvers.empty()) throw std::invalid_argument("SweepConfig: no solvers requested");
    for (const auto& name : solvers)
      if (name != "lasso" && name != "wlasso" && name != "poisson_like")
        throw std::invalid_argument("SweepConfig: unknown solver " + name);
    if (lambda_strategy == LambdaStrategy::fixed && !(lambda_value >= 0.0))
      throw std::invalid_argument("SweepConfig: fixed lambda must be >= 0");
    if (axis == SweepAxis::q)
      for (double value : grid)
        if (!(value > 0.0 && value <= 1.0))
          throw std::invalid_argument("SweepConfig: q grid values must lie in (0, 1]");
  }
};

struct TrialRecord {
  int axis_index = 0;
  double axis_value = 0.0;
  int trial = 0;
  std::string solver;
  double mse = 0.0;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SweepRecord {
  double axis_value = 0.0;
  std::string solver;
  double mean_mse = 0.0;
  double std_mse = 0.0;
  int trials = 0;
  double mean_lambda = 0.0;
  double mean_iterations = 0.0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<TrialRecord> trials;
};

template <typename Fn>
void parallel_for(int total, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, total));
  if (threads == 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& worker : pool) worker.join();
  for (auto& error : errors)
    if (error) std::rethrow_exception(error);
}

namespace detail {

struct TrialParams {
  int p;
  int n;
  double T;
  double q;
  double r_q;
};

inline TrialParams resolve_params(const SweepConfig& config, double axis_value) {
  TrialParams params{config.fixed.p, config.fixed.n, config.fixed.T, config.fixed.q,
                     config.fixed.r_q};
  switch (config.axis) {
    case SweepAxis::n: params.n = static_cast<int>(std::llround(axis_value)); break;
    case SweepAxis::T: params.T = axis_value; break;
    case SweepAxis::q: params.q = axis_value; break;
  }
  return params;
}

inline Vector load_weights(const std::string& path, int dim) {
  const auto lines = split_lines(read_text_file(path));
  if (static_cast<int>(lines.size()) != dim)
    throw std::invalid_argument("weights file row count mismatch: " + path);
  Vector w(dim);
  for (int j = 0; j < dim; ++j) w[j] = std::stod(lines[j]);
  return w;
}

}  // namespace detail

// One simulated experiment: ensemble -> embed -> signal -> observation ->
// lambda per strategy -> one fit per requested solver. Fully deterministic
// from (master seed, axis index, trial index).
inline std::vector<TrialRecord> run_single_trial(const SweepConfig& config, int axis_index,
                                                 int trial_idx,
                                                 std::shared_ptr<const OrthonormalBasis> basis) {
  const double axis_value = config.grid.at(axis_index);
  const detail::TrialParams params = detail::resolve_params(config, axis_value);
  const std::uint64_t trial_seed =
      mix64(config.seed, static_cast<std::uint64_t>(axis_index),
            static_cast<std::uint64_t>(trial_idx));

  const RawEnsemble raw =
      config.fixed.ensemble == EnsembleKind::bernoulli
          ? sample_bernoulli_ensemble(params.n, params.p, mix64(trial_seed, 1))
          : sample_uniform_ensemble(params.n, params.p, config.fixed.a_lo, config.fixed.a_hi,
                                    mix64(trial_seed, 1));
  const SensingMatrix A = embed_physical(raw);

  SignalSpec spec;
  spec.p = params.p;
  spec.q = params.q;
  spec.r_q = params.r_q;
  spec.basis = config.fixed.basis;
  spec.seed = mix64(trial_seed, 2);
  const GroundTruth truth = generate_signal(spec, *basis);

  const Observation obs = sample_observation(A, truth.f, params.T, mix64(trial_seed, 3));
  const ReducedProblem problem(obs.counts, A.entries, basis, params.T);

  double lambda = config.lambda_value;
  if (config.lambda_strategy != LambdaStrategy::fixed) {
    const int k_raw = effective_sparsity(params.r_q, params.q, params.p, params.T);
    const int k_tilde = std::max(1, std::min(k_raw, params.p / 2));
    const double delta_hat =
        estimate_upper_rip(raw, *basis, k_tilde, config.rip_trials, mix64(trial_seed, 4));
    const double lambda_n =
        theoretical_lambda(params.T, params.p, delta_hat, raw.a_lo, raw.a_hi);
    if (config.lambda_strategy == LambdaStrategy::theoretical) {
      lambda = lambda_n;
    } else {
      std::vector<double> grid(config.cv_grid_size);
      const double lo = std::log(lambda_n / config.cv_span);
      const double hi = std::log(lambda_n * config.cv_span);
      for (int g = 0; g < config.cv_grid_size; ++g)
        grid[g] = std::exp(lo + (hi - lo) * g / std::max(1, config.cv_grid_size - 1));
      lambda = cross_validate(problem, grid, config.folds, mix64(trial_seed, 5), config.solver)
                   .lambda_star;
    }
  }

  std::vector<TrialRecord> records;
  records.reserve(config.solvers.size());
  for (const auto& name : config.solvers) {
    EstimateResult fit;
    if (name == "lasso") {
      fit = fit_lasso(problem, lambda, config.solver);
    } else if (name == "wlasso") {
      const Vector weights = config.weights_source.empty()
                                 ? Vector::Ones(params.p - 1)
                                 : detail::load_weights(config.weights_source, params.p - 1);
      fit = fit_weighted_lasso(problem, lambda, weights, config.solver);
    } else {
      // The strategy lambda lives on the (n/T^2)-scaled quadratic objective.
      // Near the optimum the Poisson likelihood is (T/2) times that scale
      // (1/(2 mu_i) vs n/T^2 with mu_i ~ T/n), so penalty and stopping
      // tolerance convert by the same factor.
      const double equivalence = params.T / 2.0;
      SolverConfig poisson_config = config.solver;
      poisson_config.tol = config.solver.tol * equivalence;
      fit = fit_poisson_mle_l1(problem, lambda * equivalence, poisson_config);
    }
    TrialRecord record;
    record.axis_index = axis_index;
    record.axis_value = axis_value;
    record.trial = trial_idx;
    record.solver = name;
    record.mse = (fit.f_hat - truth.f).squaredNorm();
    record.lambda = lambda;  // strategy-level value, comparable across solvers
    record.iterations = fit.iterations;
    record.converged = fit.converged;
    records.push_back(std::move(record));
  }
  return records;
}

inline std::vector<TrialRecord> run_single_trial(const SweepConfig& config, int axis_index,
                                                 int trial_idx) {
  auto basis = std::make_shared<const OrthonormalBasis>(
      build_basis(config.fixed.basis, config.fixed.p));
  return run_single_trial(config, axis_index, trial_idx, std::move(basis));
}

// Runs trials for every grid point (trial-level parallelism) and aggregates
// mean/std per (grid point, solver). Output is independent of the thread
// count: work items write into preassigned slots and aggregation follows a
// fixed order.
inline SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  const auto basis = std::make_shared<const OrthonormalBasis>(
      build_basis(config.fixed.basis, config.fixed.p));
  const int n_axis = static_cast<int>(config.grid.size());
  const int total = n_axis * config.trials;
  std::vector<std::vector<TrialRecord>> slots(total);
  parallel_for(total, config.threads, [&](int item) {
    const int axis_index = item / config.trials;
    const int trial_idx = item % config.trials;
    try {
      slots[item] = run_single_trial(config, axis_index, trial_idx, basis);
    } catch (const std::exception& error) {
      throw std::runtime_error("trial failed (axis " + std::string(to_string(config.axis)) +
                               "=" + format_double(config.grid[axis_index]) + ", trial " +
                               std::to_string(trial_idx) + "): " + error.what());
    }
  });

  SweepResult result;
  result.trials.reserve(total * config.solvers.size());
  for (const auto& slot : slots)
    for (const auto& record : slot) result.trials.push_back(record);

  for (int axis_index = 0; axis_index < n_axis; ++axis_index) {
    for (const auto& solver : config.solvers) {
      SweepRecord record;
      record.axis_value = config.grid[axis_index];
      record.solver = solver;
      std::vector<double> mses;
      double sum_lambda = 0.0, sum_iter = 0.0;
      for (const auto& trial : result.trials) {
        if (trial.axis_index != axis_index || trial.solver != solver) continue;
        mses.push_back(trial.mse);
        sum_lambda += trial.lambda;
        sum_iter += trial.iterations;
      }
      record.trials = static_cast<int>(mses.size());
      double sum = 0.0;
      for (double value : mses) sum += value;
      record.mean_mse = sum / record.trials;
      double ss = 0.0;
      for (double value : mses) ss += (value - record.mean_mse) * (value - record.mean_mse);
      record.std_mse = record.trials > 1 ? std::sqrt(ss / (record.trials - 1)) : 0.0;
      record.mean_lambda = sum_lambda / record.trials;
      record.mean_iterations = sum_iter / record.trials;
      result.records.push_back(std::move(record));
    }
  }
  return result;
}

// --- emission ---

inline std::string sweep_to_csv(const std::vector<SweepRecord>& records, SweepAxis axis) {
  std::ostringstream out;
  out << "axis,axis_value,solver,mean_mse,std_mse,trials,mean_lambda,mean_iterations\n";
  for (const auto& record : records) {
    out << to_string(axis) << ',' << format_double(record.axis_value) << ',' << record.solver
        << ',' << format_double(record.mean_mse) << ',' << format_double(record.std_mse) << ','
        << record.trials << ',' << format_double(record.mean_lambda) << ','
        << format_double(record.mean_iterations) << '\n';
  }
  return out.str();
}

inline void emit_csv(const std::vector<SweepRecord>& records, SweepAxis axis,
                     const std::string& path) {
  detail::write_text_file(path, sweep_to_csv(records, axis));
}

inline json config_to_json(const SweepConfig& config) {
  json fixed{{"p", config.fixed.p},
             {"n", config.fixed.n},
             {"T", config.fixed.T},
             {"q", config.fixed.q},
             {"r_q", config.fixed.r_q},
             {"basis", to_string(config.fixed.basis)},
             {"a_lo", config.fixed.a_lo},
             {"a_hi", config.fixed.a_hi},
             {"ensemble",
              config.fixed.ensemble == EnsembleKind::bernoulli ? "bernoulli" : "uniform"}};
  fixed.erase(to_string(config.axis));  // the swept field is never duplicated
  json j{{"axis", to_string(config.axis)},
         {"grid", config.grid},
         {"fixed", fixed},
         {"trials", config.trials},
         {"folds", config.folds},
         {"lambda_strategy", to_string(config.lambda_strategy)},
         {"solvers", config.solvers},
         {"seed", config.seed},
         {"threads", config.threads},
         {"rip_trials", config.rip_trials},
         {"cv_grid_size", config.cv_grid_size},
         {"cv_span", config.cv_span}};
  if (config.lambda_strategy == LambdaStrategy::fixed) j["lambda_value"] = config.lambda_value;
  if (!config.weights_source.empty()) j["weights_source"] = config.weights_source;
  return j;
}

inline SweepConfig config_from_json(const json& j) {
  SweepConfig config;
  const std::string axis = j.at("axis").get<std::string>();
  if (axis == "n") config.axis = SweepAxis::n;
  else if (axis == "T") config.axis = SweepAxis::T;
  else if (axis == "q") config.axis = SweepAxis::q;
  else throw std::invalid_argument("config: unknown axis " + axis);
  config.grid = j.at("grid").get<std::vector<double>>();
  if (j.contains("fixed")) {
    const json& fixed = j.at("fixed");
    if (fixed.contains(axis))
      throw std::invalid_argument("config: axis '" + axis + "' duplicated in fixed");
    if (fixed.contains("p")) config.fixed.p = fixed.at("p").get<int>();
    if (fixed.contains("n")) config.fixed.n = fixed.at("n").get<int>();
    if (fixed.contains("T")) config.fixed.T = fixed.at("T").get<double>();
    if (fixed.contains("q")) config.fixed.q = fixed.at("q").get<double>();
    if (fixed.contains("r_q")) config.fixed.r_q = fixed.at("r_q").get<double>();
    if (fixed.contains("basis"))
      config.fixed.basis = basis_kind_from_string(fixed.at("basis").get<std::string>());
    if (fixed.contains("a_lo")) config.fixed.a_lo = fixed.at("a_lo").get<double>();
    if (fixed.contains("a_hi")) config.fixed.a_hi = fixed.at("a_hi").get<double>();
    if (fixed.contains("ensemble"))
      config.fixed.ensemble = fixed.at("ensemble").get<std::string>() == "uniform"
                                  ? EnsembleKind::uniform
                                  : EnsembleKind::bernoulli;
  }
  if (j.contains("trials")) config.trials = j.at("trials").get<int>();
  if (j.contains("folds")) config.folds = j.at("folds").get<int>();
  if (j.contains("lambda_strategy")) {
    const std::string strategy = j.at("lambda_strategy").get<std::string>();
    if (strategy == "theoretical") config.lambda_strategy = LambdaStrategy::theoretical;
    else if (strategy == "cv") config.lambda_strategy = LambdaStrategy::cv;
    else if (strategy == "fixed") config.lambda_strategy = LambdaStrategy::fixed;
    else throw std::invalid_argument("config: unknown lambda_strategy " + strategy);
  }
  if (j.contains("lambda_value")) config.lambda_value = j.at("lambda_value").get<double>();
  if (j.contains("solvers")) config.solvers = j.at("solvers").get<std::vector<std::string>>();
  if (j.contains("weights_source"))
    config.weights_source = j.at("weights_source").get<std::string>();
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("threads")) config.threads = j.at("threads").get<int>();
  if (j.contains("rip_trials")) config.rip_trials = j.at("rip_trials").get<int>();
  if (j.contains("cv_grid_size")) config.cv_grid_size = j.at("cv_grid_size").get<int>();
  if (j.contains("cv_span")) config.cv_span = j.at("cv_span").get<double>();
  return config;
}

inline json sweep_to_json(const SweepResult& result, const SweepConfig& config) {
  json records = json::array();
  for (const auto& record : result.records) {
    records.push_back(json{{"axis_value", record.axis_value},
                           {"solver", record.solver},
                           {"mean_mse", record.mean_mse},
                           {"std_mse", record.std_mse},
                           {"trials", record.trials},
                           {"mean_lambda", record.mean_lambda},
                           {"mean_iterations", record.mean_iterations}});
  }
  json trials = json::array();
  for (const auto& trial : result.trials) {
    trials.push_back(json{{"axis_index", trial.axis_index},
                          {"axis_value", trial.axis_value},
                          {"trial", trial.trial},
                          {"solver", trial.solver},
                          {"mse", trial.mse},
                          {"lambda", trial.lambda},
                          {"iterations", trial.iterations},
                          {"converged", trial.converged}});
  }
  return json{{"config", config_to_json(config)}, {"records", records}, {"trials", trials}};
}

inline std::vector<SweepRecord> records_from_json(const json& j) {
  std::vector<SweepRecord> records;
  for (const auto& item : j.at("records")) {
    SweepRecord record;
    record.axis_value = item.at("axis_value").get<double>();
    record.solver = item.at("solver").get<std::string>();
    record.mean_mse = item.at("mean_mse").get<double>();
    record.std_mse = item.at("std_mse").get<double>();
    record.trials = item.at("trials").get<int>();
    record.mean_lambda = item.at("mean_lambda").get<double>();
    record.mean_iterations = item.at("mean_iterations").get<double>();
    records.push_back(std::move(record));
  }
  return records;
}

inline void emit_json(const SweepResult& result, const SweepConfig& config,
                      const std::string& path) {
  detail::write_text_file(path, sweep_to_json(result, config).dump(2) + "\n");
}

// --- verification suite ---

struct VerifyParams {
  int p = 256;
  int n = 400;
  double T = 1e7;
  double q = 0.5;
  double r_q = 2.0;
  BasisKind basis = BasisKind::dct;
  int rip_trials = 500;
  int re_samples = 2000;
  int kl_samples = 2000;
  int bound_seeds = 200;
  int packing_p = 32;
  int packing_k = 4;
  bool inject_negative_entry = false;  // diagnostic hook
};

struct VerifyItem {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyItem> items;

  bool pass() const {
    for (const auto& item : items)
      if (!item.pass) return false;
    return true;
  }
};

inline VerifyReport run_verification_suite(const VerifyParams& params, std::uint64_t seed) {
  VerifyReport report;
  const auto basis =
      std::make_shared<const OrthonormalBasis>(build_basis(params.basis, params.p));

  RawEnsemble raw = sample_bernoulli_ensemble(params.n, params.p, mix64(seed, 1));
  const SensingMatrix A = embed_physical(raw);

  {
    // the injection hook only tampers with the copy handed to this check,
    // so a corrupted matrix trips exactly one item
    Matrix checked = A.entries;
    if (params.inject_negative_entry) checked(0, 0) = -1e-6;
    const ConstraintReport physical = verify_physical(checked);
    report.items.push_back({"physical_constraints", physical.pass(),
                            "min_entry=" + format_double(physical.min_entry) +
                                " max_col_sum=" + format_double(physical.max_column_sum)});
  }

  SignalSpec spec;
  spec.p = params.p;
  spec.q = params.q;
  spec.r_q = params.r_q;
  spec.basis = params.basis;
  spec.seed = mix64(seed, 2);
  const GroundTruth truth = generate_signal(spec, *basis);
  {
    const MeanRange range = mean_range(A.entries, truth.f);
    report.items.push_back({"mean_range", range.in_lemma_range,
                            "min=" + format_double(range.min_mean) +
                                " max=" + format_double(range.max_mean)});
  }

  const int k_raw = effective_sparsity(params.r_q, params.q, params.p, params.T);
  const int k_tilde = std::max(1, std::min(k_raw, params.p / 2));
  const double delta_hat =
      estimate_upper_rip(raw, *basis, k_tilde, params.rip_trials, mix64(seed, 3));
  report.items.push_back({"upper_rip", delta_hat < 1.0,
                          "delta_hat=" + format_double(delta_hat) +
                              " K_tilde=" + std::to_string(k_tilde)});

  {
    const Matrix gamma = std::sqrt(static_cast<double>(params.n)) * raw.entries;
    const REReport margin = re_margin(gamma, nullptr, params.re_samples, mix64(seed, 4));
    report.items.push_back({"re_margin", margin.c_hat <= 3.0,
                            "c_hat=" + format_double(margin.c_hat) +
                                " worst_deficit=" + format_double(margin.worst_deficit)});
  }

  {
    const EnergyReport energy =
        column_energy_check(A.entries, *basis, delta_hat, raw.a_lo, raw.a_hi);
    report.items.push_back({"column_energy", energy.pass,
                            "max_ratio=" + format_double(energy.max_ratio)});
  }

  {
    bool ok = true;
    for (double lambda : {0.1, 1.0, 10.0, 1e3, 1e5}) {
      for (int step = 0; step <= 100; ++step) {
        if (!mgf_bound_check(lambda, step / 100.0).pass) ok = false;
      }
    }
    report.items.push_back({"mgf_grid", ok, "lambda in {0.1,1,10,1e3,1e5}, s on 0.01 grid"});
  }

  {
    Rng rng = Rng::from_stream(seed, 5);
    bool ok = true;
    for (int i = 0; i < params.kl_samples && ok; ++i) {
      const int dim = 1 + static_cast<int>(rng.below(8));
      Vector mu1(dim), mu2(dim);
      const double c = std::exp(rng.uniform(-3.0, 3.0));
      for (int d = 0; d < dim; ++d) {
        mu1[d] = std::exp(rng.uniform(-3.0, 6.0));
        mu2[d] = c + std::exp(rng.uniform(-3.0, 6.0));
      }
      if (!kl_poisson_check(mu1, mu2, c).pass) ok = false;
    }
    report.items.push_back({"kl_poisson", ok, std::to_string(params.kl_samples) + " triples"});
  }

  {
    const auto packing_basis = build_basis(params.basis, params.packing_p);
    const PackingSet packing = build_packing(params.packing_p, params.packing_k, packing_basis,
                                             params.r_q, params.q, mix64(seed, 6));
    const PackingCheck check = verify_packing(packing, packing_basis);
    report.items.push_back({"packing_lemma", check.pass(),
                            "size=" + std::to_string(packing.points.size()) +
                                " target=" + format_double(packing.target_cardinality)});
  }

  {
    // finite differences on both smooth parts, small instance
    const int p_small = 8, n_small = 12;
    const auto basis_small =
        std::make_shared<const OrthonormalBasis>(build_basis(BasisKind::dct, p_small));
    RawEnsemble raw_small = sample_bernoulli_ensemble(n_small, p_small, mix64(seed, 7));
    SensingMatrix A_small = embed_physical(raw_small);
    SignalSpec spec_small{p_small, 0.5, 1.0, BasisKind::dct, mix64(seed, 8)};
    const GroundTruth truth_small = generate_signal(spec_small, *basis_small);
    const double T_small = 1e5;
    const Observation obs_small =
        sample_observation(A_small, truth_small.f, T_small, mix64(seed, 9));
    const ReducedProblem problem(obs_small.counts, A_small.entries, basis_small, T_small);
    Rng rng = Rng::from_stream(seed, 10);
    Vector point(p_small - 1);
    for (int j = 0; j < point.size(); ++j) point[j] = 0.01 * rng.normal();
    const Vector grad = gradient_smooth(point, problem);
    double worst = 0.0;
    const double h = 1e-6;
    for (int j = 0; j < point.size(); ++j) {
      Vector lo = point, hi = point;
      lo[j] -= h;
      hi[j] += h;
      const double fd = (objective(hi, problem, 0.0) - objective(lo, problem, 0.0)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - grad[j]) / std::max(1.0, std::abs(grad[j])));
    }
    report.items.push_back(
        {"gradient_fd", worst < 1e-6, "max_rel_err=" + format_double(worst)});
  }

  {
    const double M = (1.0 + delta_hat) / (4.0 * (raw.a_hi - raw.a_lo) * (raw.a_hi - raw.a_lo));
    const double freq = gradient_bound_frequency(A, basis, truth.f, params.T, M,
                                                 params.bound_seeds, mix64(seed, 11));
    const double allowed = 2.0 / (params.p - 1) + 0.02;
    report.items.push_back({"gradient_bound_event", freq <= allowed,
                            "freq=" + format_double(freq) +
                                " allowed=" + format_double(allowed)});
  }

  return report;
}

}  // namespace fluxcs
