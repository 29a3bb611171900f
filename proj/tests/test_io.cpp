#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>

#include "fluxcs/io.hpp"
#include "fluxcs/signal.hpp"

using namespace fluxcs;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("fluxcs_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("matrix csv round trip restores entries and provenance", "[io]") {
  TempDir tmp;
  const SensingMatrix A = embed_physical(sample_bernoulli_ensemble(12, 8, 77));
  save_matrix_csv(A, tmp.file("a.csv"));
  const SensingMatrix back = load_matrix_csv(tmp.file("a.csv"));
  REQUIRE(back.n() == 12);
  REQUIRE(back.p() == 8);
  REQUIRE((back.entries - A.entries).cwiseAbs().maxCoeff() < 1e-15);
  REQUIRE(back.provenance.seed == 77);
  REQUIRE((back.provenance.entries - A.provenance.entries).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("signal csv round trip", "[io]") {
  TempDir tmp;
  SignalSpec spec{32, 0.5, 2.0, BasisKind::dwt_haar, 9};
  const GroundTruth truth = generate_signal(spec);
  save_signal_csv(truth, spec, tmp.file("s.csv"));
  const auto [back, back_spec] = load_signal_csv(tmp.file("s.csv"));
  REQUIRE(back_spec.p == 32);
  REQUIRE(back_spec.basis == BasisKind::dwt_haar);
  REQUIRE(back_spec.seed == 9);
  REQUIRE((back.theta - truth.theta).lpNorm<Eigen::Infinity>() < 1e-15);
  REQUIRE((back.f - truth.f).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("observation csv round trip", "[io]") {
  TempDir tmp;
  const SensingMatrix A = embed_physical(sample_bernoulli_ensemble(10, 8, 3));
  const Vector f = Vector::Constant(8, 0.125);
  const Observation obs = sample_observation(A, f, 5e4, 21);
  save_observation_csv(obs, tmp.file("y.csv"));
  const Observation back = load_observation_csv(tmp.file("y.csv"));
  REQUIRE(back.intensity == 5e4);
  REQUIRE(back.seed == 21);
  REQUIRE((back.counts - obs.counts).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("estimate serialization carries the summary fields", "[io]") {
  EstimateResult result;
  result.theta_hat = Vector::Constant(4, 0.5);
  result.f_hat = Vector::Constant(4, 0.25);
  result.lambda = 0.125;
  result.objective = 1.5;
  result.iterations = 12;
  result.converged = true;
  result.kkt_residual = 1e-9;
  const json j = estimate_to_json(result);
  REQUIRE(j.at("lambda").get<double>() == 0.125);
  REQUIRE(j.at("iterations").get<int>() == 12);
  REQUIRE(j.at("converged").get<bool>());
  const std::string csv = estimate_to_csv(result);
  REQUIRE(csv.rfind("index,theta_hat,f_hat\n", 0) == 0);
}

TEST_CASE("theory reports serialize to json and packing sets to csv", "[io]") {
  RateParams params;
  params.p = 256;
  params.n = 400;
  params.T = 1e7;
  params.q = 0.5;
  params.r_q = 2.0;
  const json regime = regime_to_json(regime_flags(params));
  REQUIRE(regime.contains("snr_ok"));
  REQUIRE(regime.at("c0").get<double>() == 1.0);

  const OrthonormalBasis basis = build_basis(BasisKind::dct, 32);
  const SensingMatrix A = embed_physical(sample_bernoulli_ensemble(64, 32, 4));
  const double delta = estimate_upper_rip(A.provenance, basis, 4, 50, 5);
  const json energy = energy_to_json(column_energy_check(A.entries, basis, delta, -1.0, 1.0));
  REQUIRE(energy.at("pass").get<bool>());

  const PackingSet packing = build_packing(32, 2, basis, 2.0, 0.5, 6);
  const std::string csv = packing_to_csv(packing);
  REQUIRE(csv.rfind("# fluxcs-packing k=2", 0) == 0);
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') ==
          static_cast<long>(packing.points.size()) + 1);
}

TEST_CASE("loaders reject malformed headers", "[io]") {
  TempDir tmp;
  detail::write_text_file(tmp.file("bad.csv"), "no header here\n1,2\n");
  REQUIRE_THROWS(load_matrix_csv(tmp.file("bad.csv")));
  REQUIRE_THROWS(load_observation_csv(tmp.file("missing.csv")));
}
