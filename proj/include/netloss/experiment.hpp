#pragma once

// Experiment files (JSON), Monte Carlo batches and result emission.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "netloss/certificates.hpp"
#include "netloss/control.hpp"
#include "netloss/loss_models.hpp"
#include "netloss/tail_bounds.hpp"

namespace netloss {

enum class Series { state_norm, ln_v, loss_ratio, trigger_gaps };

[[nodiscard]] std::string_view to_string(Series s);

struct ExplicitGain {
  Mat k;
  Mat p;
  double beta = 0.0;
};

// K = M Q^{-1}, P = Q^{-1}.
struct LmiGain {
  Mat q;
  Mat m;
  double beta = 0.0;
};

struct DesignRequest {
  double rho = 0.0;
  double delta = 0.01;
  std::vector<double> beta_grid;  // empty: default grid
};

using ControllerSource = std::variant<ExplicitGain, LmiGain, DesignRequest>;

struct StabilityRequest {
  double phi = 1.0;
  double rho = 0.0;
};

struct InstabilityRequest {
  Mat p_hat;
  double beta_hat = 0.0;
  double phi_hat = 1.0;
  double sigma = 0.0;
};

struct ExperimentSpec {
  std::string name;
  PlantModel plant{Mat::identity(1), Mat::identity(1)};
  ControllerSource controller;
  std::uint64_t theta = 1;
  std::optional<StabilityRequest> stability;
  std::optional<InstabilityRequest> instability;
  LossChannel channel = LossChannel::never_fail();
  SimConfig sim;
  std::uint64_t paths = 1;
  std::vector<Series> series;
  bool want_certificates = false;
};

// Throws ValidationError with the offending key on malformed input.
[[nodiscard]] ExperimentSpec parse_experiment(std::string_view json_text);
[[nodiscard]] ExperimentSpec load_experiment(const std::filesystem::path& file);

// Bundled experiment files.
[[nodiscard]] std::vector<std::string> preset_names();
[[nodiscard]] std::string_view preset_text(std::string_view name);
// "preset:NAME" or a file path.
[[nodiscard]] ExperimentSpec load_experiment_ref(const std::string& ref);

struct CertificateReport {
  std::optional<StabilityCertificate> stability;
  std::optional<InstabilityCertificate> instability;
  std::optional<LmiReport> lmi;
  std::optional<DesignResult> design;
  // Controller actually used: gain, Lyapunov matrix and level.
  Mat k;
  Mat p;
  double beta = 0.0;
};

// Builds the controller (running the design search if requested) and
// evaluates the requested certificates.
[[nodiscard]] CertificateReport certify(const ExperimentSpec& spec);

struct PathSummary {
  std::uint64_t path = 0;
  std::uint64_t seed = 0;
  Verdict verdict = Verdict::inconclusive;
  std::uint64_t final_time = 0;
  double final_norm = 0.0;
  double final_ln_v = 0.0;
  std::uint64_t attempts = 0;
  double final_ratio = 0.0;  // L(k)/k at the last recorded attempt (NaN if none)
};

struct SeriesStats {
  std::vector<double> min;
  std::vector<double> median;
  std::vector<double> max;
};

struct BatchResult {
  std::string name;
  std::vector<PathSummary> summaries;
  // series -> per-path values (paths may have different lengths).
  std::map<Series, std::vector<std::vector<double>>> series;
  std::map<Series, SeriesStats> aggregates;
  CertificateReport certificates;
  bool want_certificates = false;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> paths;
};

[[nodiscard]] BatchResult run_experiment(const ExperimentSpec& spec, const RunOverrides& overrides = {});

enum class OutputFormat { csv, json };

// CSV: one <series>.csv per requested series (header t,path_0,...),
// <series>_stats.csv, summary.csv and certificates.csv. JSON: result.json
// with the same content. Throws IoError naming the path on failure.
void emit(const BatchResult& result, OutputFormat format, const std::filesystem::path& dest);

// JSON text helpers shared with the CLI and the Python module.
[[nodiscard]] std::string to_json(const BatchResult& result, int indent = -1);
[[nodiscard]] std::string to_json(const CertificateReport& report, int indent = -1);
[[nodiscard]] std::string to_json(const DesignResult& design, int indent = -1);

// 17 significant digits (round-trips exactly); inf/nan spelled out.
[[nodiscard]] std::string format_double(double v);

// Tail-bound oracle experiment: exact tail probabilities of a loss chain vs
// the psi_k bound for k = 1..k_max.
struct OracleSpec {
  MarkovLossModel chain = MarkovLossModel::never_fail();
  double rho = 0.5;
  double p_tilde = 0.0;  // defaults to the chain's failure bound
  unsigned k_max = 20;
};

struct OracleRow {
  unsigned k = 0;
  double exact = 0.0;
  double bound = 0.0;
  bool sound = false;
};

[[nodiscard]] OracleSpec parse_oracle(std::string_view json_text);
[[nodiscard]] std::vector<OracleRow> run_oracle(const OracleSpec& spec);

// Parses a loss-chain description (shared by experiment and oracle files).
[[nodiscard]] MarkovLossModel parse_chain_json(std::string_view json_text);

}  // namespace netloss
