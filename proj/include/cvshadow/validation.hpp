#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cvshadow {

/// Outcome of one self-check. `measured` and `limit` are the headline
/// numbers (an error and its tolerance, or a count and its requirement).
struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double limit = 0.0;
  std::string detail;
};

// Exact-distribution checks, seconds each.
Check check_homodyne_completeness(int N_max = 6);
Check check_pnr_duality(int N_max = 4);
Check check_bound_regression();
Check check_empirical_norms(int N_max = 6);
Check check_parity_wigner();

// Property suites.
Check check_snapshot_hermiticity();
Check check_shadow_merge();
Check check_projection_idempotence();
Check check_norm_chain();
Check check_sampler_reproducibility();
Check check_parser_rejection();
std::vector<Check> property_suites();

// Monte Carlo reconstructions of the reference experiments, minutes each.
Check check_cat_homodyne(std::uint64_t seed = 1);
Check check_cat_pnr(std::uint64_t seed = 1);

struct TwoModeRun {
  std::vector<double> separable;  // per seed
  std::vector<double> entangled;
};
TwoModeRun run_two_mode(int seeds = 10, std::size_t T = 50000);
std::vector<Check> check_two_mode(const TwoModeRun& run);

/// Everything except the Monte Carlo reconstructions unless `full`.
std::vector<Check> run_validation(bool full, const std::function<void(const Check&)>& on_result = {});

}  // namespace cvshadow
