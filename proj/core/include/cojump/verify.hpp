#ifndef COJUMP_VERIFY_HPP
#define COJUMP_VERIFY_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "cojump/config.hpp"
#include "cojump/moments.hpp"

namespace cojump {

struct CheckRow {
  std::string check;
  std::string detail;
  double observed = 0.0;   // achieved error / p-value / z-score
  double threshold = 0.0;  // the bound it is held against
  bool pass = false;
};

struct SuiteResult {
  std::string suite;
  std::vector<CheckRow> rows;
  bool pass = true;

  void add(CheckRow row);
};

/// Writes rows as CSV (check, detail, observed, threshold, pass).
void write_suite_csv(std::ostream& os, const SuiteResult& result);

/// Closed-form identity checks, no randomness involved:
///  - covariance by pairwise summation vs the closed form, relative 1e-8,
///    for y1,y2 in 0..y_max and (delta, tau) on grid x grid;
///  - pairwise-rate normalization against the closed-form total, relative
///    1e-9, on the same grid and for pool totals up to extended_total_max
///    at (delta, tau) = (1, 1);
///  - the noiseless limit at tau = 1e-6: single-jump rates against delta*y
///    and covariance/tau against y1*y2*delta^2, relative 1e-3.
struct IdentityOptions {
  int y_max = 12;
  std::vector<double> grid{0.1, 0.5, 1.0, 2.0};
  std::vector<int> extended_totals{50, 100, 150, 200, 250, 300};
};
SuiteResult verify_identities(const IdentityOptions& options = {});

/// Distributional equivalence of the three routes to the one-step law of the
/// noisy death pair: the co-jump simulator, the explicit random-environment
/// simulator, and the quadrature oracle.
struct OracleOptions {
  int y1 = 5, y2 = 5;
  double delta = 0.5;
  double tau = 0.5;
  double h = 0.1;
  std::uint64_t replicates = 100'000;
  std::uint64_t seed = 2024;
  unsigned threads = 0;
  double min_p_value = 0.001;
  double max_total_variation = 0.01;
};
SuiteResult verify_oracle(const OracleOptions& options);

/// Monte Carlo moment estimates against the closed forms, for the configured
/// model at its initial state: the co-jump covariance of each family pair
/// and the infinitesimal mean of each family's first member.
struct MomentsOptions {
  std::uint64_t replicates = 100'000;
  std::uint64_t seed = 2024;
  double h = 0.0;  // 0 = choose so that lambda * h ~ 0.04
  unsigned threads = 0;
  double max_abs_z = 3.0;
};
SuiteResult verify_moments(const RunConfig& config, const MomentsOptions& options,
                           std::vector<EstimateReportRow>* report_rows = nullptr);

/// Rate-bound property along simulated trajectories: lambda(x) never exceeds
/// the model's static bound over `states` sampled states.
struct BoundsOptions {
  std::uint64_t states = 1000;
  std::uint64_t seed = 2024;
  double t_end = 40.0;
};
SuiteResult verify_bounds(const RunConfig& config, const BoundsOptions& options);

}  // namespace cojump

#endif  // COJUMP_VERIFY_HPP
