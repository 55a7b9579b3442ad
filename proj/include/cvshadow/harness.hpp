#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cvshadow/displaced.hpp"
#include "cvshadow/fock.hpp"
#include "cvshadow/shadow.hpp"

namespace cvshadow {

inline constexpr int kReportSchemaVersion = 1;

/// Measurement protocol of an experiment. PNR outcomes with n >= N are
/// discarded; parity keeps every outcome (r = 0 only).
struct ProtocolSpec {
  enum class Kind { homodyne, pnr, parity };
  Kind kind = Kind::homodyne;
  double r = 0.0;
  double alpha_max = 0.0;      // fixed disk radius when positive
  double region_factor = 4.0;  // otherwise alpha_max^2 = region_factor * N

  TParams params(int N) const;
  void validate() const;
};

std::string to_string(ProtocolSpec::Kind kind);
ProtocolSpec::Kind protocol_kind(const std::string& name);

struct TSearch {
  std::size_t T_min = 64;
  std::size_t T_max = std::size_t{1} << 20;
  double growth = 2.0;
  double resolution = 0.05;  // bisection stops once hi - lo <= resolution * lo
};

struct ExperimentConfig {
  nlohmann::json state = {{"kind", "vacuum"}};  // see state_from_json
  ProtocolSpec protocol;
  std::vector<int> N_list = {2, 3, 4, 5, 6};
  double epsilon = 0.1;
  double delta = 0.1;
  int trials_per_T = 100;
  TSearch search;
  std::uint64_t root_seed = 0;
  int threads = 0;  // 0: hardware concurrency; results do not depend on it

  void validate() const;
};

/// {"kind": "vacuum" | "fock" | "coherent" | "cat" | "random_pure" | "density",
///  "n", "alpha_re", "alpha_im", "odd", "seed", "cutoff", "density": {...}}.
/// Without "cutoff", coherent and cat states use suggested_cutoff and the
/// others the smallest dimension that holds them (at least `min_cutoff`).
StateSpec state_from_json(const nlohmann::json& j, int min_cutoff = 1);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
nlohmann::json to_json(const ProtocolSpec& p);
ProtocolSpec protocol_from_json(const nlohmann::json& j);

/// Wilson score interval for k failures out of n at z = 1.96.
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.96);

struct Evaluation {
  std::size_t T = 0;
  std::size_t failures = 0;
  std::size_t trials = 0;
  double delta_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<double> errors;  // per trial, in trial order
};

struct MinTResult {
  int N = 0;
  std::optional<std::size_t> min_T;  // empty when censored
  bool censored = false;
  bool at_lower_bound = false;  // T_min already met the target
  std::vector<Evaluation> evaluations;  // sorted by T
};

/// Repeated shadows of one (state, protocol, N) triple. Trial i draws from
/// Rng(root_seed, stream(N, i)); evaluating at T extends the closest smaller
/// checkpoint of that trial, so every T sees prefixes of the same stream.
class TrialSet {
 public:
  TrialSet(const ExperimentConfig& config, int N);
  ~TrialSet();
  TrialSet(const TrialSet&) = delete;
  TrialSet& operator=(const TrialSet&) = delete;

  Evaluation evaluate(std::size_t T);
  const FockOperator& target() const;

  static std::uint64_t stream(int N, int trial) {
    return (static_cast<std::uint64_t>(N) << 32) | static_cast<std::uint32_t>(trial);
  }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

MinTResult find_min_T(const ExperimentConfig& config, int N);

struct FitResult {
  double p = 0.0;
  double intercept = 0.0;  // log T = intercept + p log N
  double p_stderr = 0.0;
  double intercept_stderr = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
};

/// Least squares on (log N, log T). Needs at least three points and two
/// distinct N; throws std::invalid_argument otherwise.
FitResult fit_exponent(const std::vector<std::pair<double, double>>& N_T);

struct ScalingReport {
  ExperimentConfig config;
  std::vector<MinTResult> results;
  std::optional<FitResult> fit;  // over uncensored N only
  std::string started;
  std::string finished;

  bool any_censored() const;
};

ScalingReport run_scaling(const ExperimentConfig& config);
nlohmann::json to_json(const ScalingReport& r);

/// Reconstruction from a record file or from the simulator.
struct ReconstructionRequest {
  ProtocolSpec protocol;
  int N = 0;
  std::optional<std::filesystem::path> records;  // theta,x / n,alpha / mode0_... CSV
  std::optional<nlohmann::json> simulate_state;  // state_from_json input
  std::size_t T = 0;
  std::uint64_t seed = 0;
  std::optional<FockOperator> reference;  // defaults to the simulated state
  std::filesystem::path density_out;      // empty: not written
  std::filesystem::path wigner_out;       // single-mode only
  std::filesystem::path report_out;
};

struct ReconstructionResult {
  FockOperator estimate;
  std::optional<double> error;  // ||estimate - reference^(N)||_inf
  nlohmann::json report;
};

ReconstructionResult run_reconstruction(const ReconstructionRequest& request);

/// UTC time as 2024-01-31T12:00:00Z.
std::string utc_timestamp();

}  // namespace cvshadow
