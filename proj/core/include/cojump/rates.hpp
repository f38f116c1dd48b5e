#ifndef COJUMP_RATES_HPP
#define COJUMP_RATES_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "cojump/binomial.hpp"

namespace cojump {

/// Magnitude of the multiplicative gamma white noise applied to a rate pair.
/// The underlying gamma process has mean t and variance tau*t at time t, so
/// tau -> 0 recovers the deterministic environment.
struct GammaNoiseParams {
  double tau = 1.0;  // > 0, time units
};

/// Signed alternating sum
///   sum_{j=0}^{n} C(n,j) (-1)^(n-j+1) tau^-1 log(1 + delta*tau*(m-j)),
/// i.e. minus the n-th forward finite difference of
/// j -> tau^-1 log1p(delta*tau*(m-j)). This is the common logarithmic factor
/// of every co-jump rate of size n in a pool of m individuals; it is
/// mathematically nonnegative.
///
/// The sum cancels catastrophically as n grows, so it is evaluated with
/// error-tracked compensated summation in double precision and escalated to
/// arbitrary-precision arithmetic whenever the tracked error is not
/// negligible against the result. Requires 1 <= n <= m. Throws PrecisionLoss
/// only if no evaluation path can certify 1e-6 relative error.
double finite_difference_log(int n, int m, double delta, double tau);

/// Closed-form rate at which k1 members of a pool of y1 and k2 members of a
/// pool of y2 transition simultaneously, when both pools share one gamma
/// white noise on a common per-capita rate delta:
///   C(y1,k1) C(y2,k2) finite_difference_log(k1+k2, y1+y2, delta, tau).
/// Throws InvalidJumpSize if k_i > y_i or (k1,k2) == (0,0).
double pairwise_cojump_rate(int y1, int y2, int k1, int k2, double delta,
                            GammaNoiseParams noise);

/// Total event rate of the noisy pair: tau^-1 log(1 + delta*tau*(y1+y2)).
/// Equals the sum of pairwise_cojump_rate over all admissible (k1,k2).
double total_cojump_rate(int y1, int y2, double delta, GammaNoiseParams noise);

/// Infinitesimal covariance between the two counting processes of the pair:
///   y1 y2 tau^-1 log((1+delta*tau)^2 / (1+2*delta*tau)),
/// strictly positive when y1,y2 >= 1 and delta,tau > 0.
double cojump_covariance_closed_form(int y1, int y2, double delta,
                                     GammaNoiseParams noise);

/// Eagerly enumerated pairwise rates q(k1,k2) for one co-jump family at a
/// concrete state (y1, y2). Immutable after construction; cheap to copy is
/// not a goal (share via pointer in hot loops).
class PairwiseRateTable {
 public:
  /// Builds the full (y1+1)x(y2+1) grid. Throws ConfigError when a source
  /// occupancy exceeds population_cap, PrecisionLoss if a rate is negative
  /// beyond the numerical clamping threshold.
  static PairwiseRateTable build(int y1, int y2, double delta,
                                 GammaNoiseParams noise,
                                 int population_cap = kDefaultPopulationCap);

  int y1() const { return y1_; }
  int y2() const { return y2_; }
  double delta() const { return delta_; }
  double tau() const { return tau_; }

  /// q(k1,k2); zero for (0,0) and for out-of-range sizes.
  double rate(int k1, int k2) const;

  /// Sum of all table entries (compensated).
  double total() const { return total_; }

  /// tau^-1 log1p(delta*tau*(y1+y2)); the analytic value of total().
  double closed_form_total() const { return closed_form_total_; }

  /// Inverse-CDF sample of (k1, k2) for u in [0,1).
  std::pair<int, int> sample(double u) const;

  /// Flat row-major view (index k1*(y2+1)+k2), for tests and summations.
  const std::vector<double>& entries() const { return rates_; }

 private:
  PairwiseRateTable() = default;

  int y1_ = 0, y2_ = 0;
  double delta_ = 0.0, tau_ = 1.0;
  double total_ = 0.0;
  double closed_form_total_ = 0.0;
  std::vector<double> rates_;
  std::vector<double> cumulative_;
};

/// Infinitesimal covariance evaluated as the weighted sum
/// sum_{k1,k2} k1 k2 q(k1,k2) over the table, with compensated summation.
/// Agrees with cojump_covariance_closed_form at the table's state.
double covariance_by_summation(const PairwiseRateTable& table);

namespace detail {

/// finite_difference_log for every n in 1..m at once (index n of the result;
/// index 0 is unused and zero). Shares one triangular difference pass, which
/// is how tables are built.
std::vector<double> difference_ladder(int m, double delta, double tau);

/// Compensated (Neumaier) summation with a running error bound.
struct CompensatedSum {
  double sum = 0.0;
  double compensation = 0.0;
  double abs_sum = 0.0;  // sum of |terms|, for error estimates

  void add(double term);
  double value() const { return sum + compensation; }
  /// Upper estimate of the accumulated floating-point error.
  double error_estimate() const;
};

}  // namespace detail

}  // namespace cojump

#endif  // COJUMP_RATES_HPP
