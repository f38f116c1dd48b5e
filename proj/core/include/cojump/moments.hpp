#ifndef COJUMP_MOMENTS_HPP
#define COJUMP_MOMENTS_HPP

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cojump/models.hpp"
#include "cojump/simulator.hpp"
#include "cojump/system.hpp"

namespace cojump {

enum class MomentKind { mean, variance, covariance };

/// A Monte Carlo estimate of an infinitesimal moment at a fixed state:
/// increments over a short window [0, h], scaled by 1/h, averaged over
/// independent replicates. The standard error comes from batch means.
struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t replicates = 0;
  double h = 0.0;
  MomentKind kind = MomentKind::mean;
};

struct EstimateOptions {
  std::uint64_t batches = 100;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::uint64_t event_budget = 10'000'000;
};

/// Estimates lim h^-1 Cov[dN_a, dN_b | state] by simulating `replicates`
/// independent windows of length h from `state`. Replicate r draws from
/// stream rng.stream + r. Requires h * rate_function <= 0.1 (StepTooLarge)
/// and replicates >= 1000. Deterministic for fixed inputs, independently of
/// the worker count.
MomentEstimate estimate_infinitesimal_covariance(const SystemSpec& spec,
                                                 const StateVector& state,
                                                 int transition_a, int transition_b,
                                                 double h, std::uint64_t replicates,
                                                 RngStream rng,
                                                 EstimateOptions options = {});

/// Same scheme for the infinitesimal mean of one counting process; the
/// target value is sum_k k * marginal_rate(state, transition, k).
MomentEstimate estimate_infinitesimal_mean(const SystemSpec& spec,
                                           const StateVector& state, int transition,
                                           double h, std::uint64_t replicates,
                                           RngStream rng, EstimateOptions options = {});

/// Exact one-step law of the subordinated bivariate death process over
/// [0, h]: P(d1, d2) computed by adaptive quadrature of the binomial mixture
/// against the gamma density (absolute error <= 1e-10 per entry; the whole
/// table sums to 1 within 1e-8 or QuadratureFailure is thrown). Requires
/// y0 <= 30 per pool.
std::map<std::pair<Count, Count>, double> one_step_distribution_oracle(
    std::pair<Count, Count> y0, double delta, GammaNoiseParams noise, double h);

/// Static majorants certifying the moment condition behind the covariance
/// summation identity: the rate function never exceeds static_lambda_bound,
/// increments never exceed static_increment_bound, and the moment bound is
/// increment^2 * lambda.
struct BoundReport {
  double lambda_at_state = 0.0;
  double static_lambda_bound = 0.0;
  double static_increment_bound = 0.0;
  double p3_moment_bound = 0.0;
};

/// Bivariate death: lambda <= delta * (y1_0 + y2_0); increments <= y1_0+y2_0.
/// Throws BoundViolated if the state's rate exceeds the bound.
BoundReport check_moment_bound(const SystemSpec& spec, const StateVector& state,
                               const BivariateDeathParams& params);

/// Closed SIR: lambda <= (m + r + lambda1_max + lambda2_max) * P with
/// lambda_i_max = beta + omega; increments <= P.
BoundReport check_moment_bound(const SystemSpec& spec, const StateVector& state,
                               const SirParams& params);

/// 64-bit FNV-1a over the occupancy vector, for report rows.
std::uint64_t state_hash(const StateVector& state);

/// One row of the estimation report CSV with schema
/// (model, state_hash, pair, h, replicates, estimate, std_error,
///  closed_form, z_score).
struct EstimateReportRow {
  std::string model;
  std::uint64_t state_hash = 0;
  std::string pair;
  double h = 0.0;
  std::uint64_t replicates = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double closed_form = 0.0;
  double z_score = 0.0;
};

void write_estimate_report_csv(std::ostream& os,
                               const std::vector<EstimateReportRow>& rows);

/// (estimate - closed_form) / std_error with a zero-safe convention.
double z_score(double estimate, double std_error, double closed_form);

}  // namespace cojump

#endif  // COJUMP_MOMENTS_HPP
