#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "fluxcs/basis.hpp"
#include "fluxcs/model.hpp"
#include "fluxcs/sensing.hpp"
#include "fluxcs/signal.hpp"
#include "fluxcs/solver.hpp"
#include "fluxcs/theory.hpp"

namespace fluxcs {

using json = nlohmann::json;

// Fixed round-trippable formatting so emitted files are byte-identical
// across runs and thread counts.
inline std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Parses "# fluxcs-<tag> key=value key=value ..." metadata lines.
inline std::unordered_map<std::string, std::string> parse_header(const std::string& line,
                                                                 const std::string& tag) {
  std::unordered_map<std::string, std::string> fields;
  std::istringstream ss(line);
  std::string token;
  ss >> token;  // '#'
  if (token != "#") throw std::runtime_error("missing metadata header");
  ss >> token;
  if (token != "fluxcs-" + tag) throw std::runtime_error("unexpected file tag: " + token);
  while (ss >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return fields;
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

// --- sensing matrices: row-major CSV with an n/p/a_lo/a_hi/seed header ---

inline std::string matrix_to_csv(const SensingMatrix& A) {
  std::ostringstream out;
  out << "# fluxcs-matrix n=" << A.n() << " p=" << A.p()
      << " a_lo=" << format_double(A.provenance.a_lo)
      << " a_hi=" << format_double(A.provenance.a_hi) << " seed=" << A.provenance.seed << "\n";
  for (int i = 0; i < A.n(); ++i) {
    for (int j = 0; j < A.p(); ++j) {
      if (j) out << ',';
      out << format_double(A.entries(i, j));
    }
    out << '\n';
  }
  return out.str();
}

inline void save_matrix_csv(const SensingMatrix& A, const std::string& path) {
  detail::write_text_file(path, matrix_to_csv(A));
}

// The embedding is affine and invertible, so the raw ensemble is recovered
// from the stored A and its (a_lo, a_hi) metadata.
inline SensingMatrix load_matrix_csv(const std::string& path) {
  const auto lines = detail::split_lines(detail::read_text_file(path));
  if (lines.empty()) throw std::runtime_error("empty matrix file: " + path);
  const auto header = detail::parse_header(lines[0], "matrix");
  const int n = std::stoi(header.at("n"));
  const int p = std::stoi(header.at("p"));
  if (static_cast<int>(lines.size()) != n + 1)
    throw std::runtime_error("matrix row count mismatch in " + path);
  Matrix A(n, p);
  for (int i = 0; i < n; ++i) {
    std::istringstream row(lines[i + 1]);
    std::string cell;
    for (int j = 0; j < p; ++j) {
      if (!std::getline(row, cell, ',')) throw std::runtime_error("short matrix row");
      A(i, j) = std::stod(cell);
    }
  }
  RawEnsemble raw;
  raw.a_lo = std::stod(header.at("a_lo"));
  raw.a_hi = std::stod(header.at("a_hi"));
  raw.seed = std::stoull(header.at("seed"));
  const double root_n = std::sqrt(static_cast<double>(n));
  raw.entries = (A.array() * (2.0 * (raw.a_hi - raw.a_lo) * root_n)) -
                (raw.a_hi - 2.0 * raw.a_lo) / root_n;
  return SensingMatrix{std::move(A), std::move(raw)};
}

// --- signals: (index, theta, f) rows with a p/q/R_q/basis/seed header ---

inline std::string signal_to_csv(const GroundTruth& truth, const SignalSpec& spec) {
  std::ostringstream out;
  out << "# fluxcs-signal p=" << spec.p << " q=" << format_double(spec.q)
      << " r_q=" << format_double(spec.r_q) << " basis=" << to_string(spec.basis)
      << " seed=" << spec.seed << "\n";
  out << "index,theta,f\n";
  for (int i = 0; i < truth.theta.size(); ++i)
    out << i << ',' << format_double(truth.theta[i]) << ',' << format_double(truth.f[i]) << '\n';
  return out.str();
}

inline void save_signal_csv(const GroundTruth& truth, const SignalSpec& spec,
                            const std::string& path) {
  detail::write_text_file(path, signal_to_csv(truth, spec));
}

inline std::pair<GroundTruth, SignalSpec> load_signal_csv(const std::string& path) {
  const auto lines = detail::split_lines(detail::read_text_file(path));
  if (lines.size() < 2) throw std::runtime_error("empty signal file: " + path);
  const auto header = detail::parse_header(lines[0], "signal");
  SignalSpec spec;
  spec.p = std::stoi(header.at("p"));
  spec.q = std::stod(header.at("q"));
  spec.r_q = std::stod(header.at("r_q"));
  spec.basis = basis_kind_from_string(header.at("basis"));
  spec.seed = std::stoull(header.at("seed"));
  GroundTruth truth;
  truth.theta.resize(spec.p);
  truth.f.resize(spec.p);
  if (static_cast<int>(lines.size()) != spec.p + 2)
    throw std::runtime_error("signal row count mismatch in " + path);
  for (int i = 0; i < spec.p; ++i) {
    std::istringstream row(lines[i + 2]);
    std::string cell;
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    truth.theta[i] = std::stod(cell);
    std::getline(row, cell, ',');
    truth.f[i] = std::stod(cell);
  }
  return {std::move(truth), spec};
}

// --- observations: (index, count) rows with an n/T/seed header ---

inline std::string observation_to_csv(const Observation& obs) {
  std::ostringstream out;
  out << "# fluxcs-observation n=" << obs.n() << " T=" << format_double(obs.intensity)
      << " seed=" << obs.seed << "\n";
  out << "index,count\n";
  for (int i = 0; i < obs.n(); ++i)
    out << i << ',' << static_cast<long long>(obs.counts[i]) << '\n';
  return out.str();
}

inline void save_observation_csv(const Observation& obs, const std::string& path) {
  detail::write_text_file(path, observation_to_csv(obs));
}

inline Observation load_observation_csv(const std::string& path) {
  const auto lines = detail::split_lines(detail::read_text_file(path));
  if (lines.size() < 2) throw std::runtime_error("empty observation file: " + path);
  const auto header = detail::parse_header(lines[0], "observation");
  Observation obs;
  const int n = std::stoi(header.at("n"));
  obs.intensity = std::stod(header.at("T"));
  obs.seed = std::stoull(header.at("seed"));
  obs.counts.resize(n);
  if (static_cast<int>(lines.size()) != n + 2)
    throw std::runtime_error("observation row count mismatch in " + path);
  for (int i = 0; i < n; ++i) {
    std::istringstream row(lines[i + 2]);
    std::string cell;
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    obs.counts[i] = std::stod(cell);
  }
  return obs;
}

// --- theory reports and packing sets ---

inline json regime_to_json(const RegimeReport& report) {
  return json{{"snr_ok", report.snr_ok},
              {"design_ok", report.design_ok},
              {"match_lower", report.match_lower},
              {"match_lower_applicable", report.match_lower_applicable},
              {"match_upper", report.match_upper},
              {"k_tilde", report.k_tilde},
              {"c0", report.c0},
              {"snr_threshold", report.snr_threshold},
              {"lower_threshold", report.lower_threshold},
              {"upper_threshold", report.upper_threshold}};
}

inline json energy_to_json(const EnergyReport& report) {
  return json{{"max_energy", report.max_energy},
              {"limit", report.limit},
              {"max_ratio", report.max_ratio},
              {"pass", report.pass}};
}

// One row per packing point: point index, then the p coefficients.
inline std::string packing_to_csv(const PackingSet& packing) {
  std::ostringstream out;
  out << "# fluxcs-packing k=" << packing.k << " alpha=" << format_double(packing.alpha)
      << " eta_sq=" << format_double(packing.eta_sq)
      << " target=" << format_double(packing.target_cardinality) << "\n";
  for (std::size_t i = 0; i < packing.points.size(); ++i) {
    out << i;
    for (int j = 0; j < packing.points[i].size(); ++j)
      out << ',' << format_double(packing.points[i][j]);
    out << '\n';
  }
  return out.str();
}

// --- estimates: scalar summary as JSON, coefficients as CSV ---

inline json estimate_to_json(const EstimateResult& result) {
  return json{{"lambda", result.lambda},
              {"objective", result.objective},
              {"iterations", result.iterations},
              {"kkt_residual", result.kkt_residual},
              {"converged", result.converged}};
}

inline std::string estimate_to_csv(const EstimateResult& result) {
  std::ostringstream out;
  out << "index,theta_hat,f_hat\n";
  for (int i = 0; i < result.theta_hat.size(); ++i)
    out << i << ',' << format_double(result.theta_hat[i]) << ','
        << format_double(result.f_hat[i]) << '\n';
  return out.str();
}

}  // namespace fluxcs
