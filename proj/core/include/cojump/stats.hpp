#ifndef COJUMP_STATS_HPP
#define COJUMP_STATS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace cojump {

/// Regularized upper incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s),
/// s > 0, x >= 0. Series for x < s+1, continued fraction otherwise.
double regularized_gamma_q(double s, double x);

/// Survival function of the chi-square distribution with df degrees of
/// freedom, i.e. the p-value of a statistic.
double chi_square_sf(double statistic, int df);

struct ChiSquareResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Pearson goodness-of-fit test of observed cell counts against a
/// distribution given as cell probabilities. Cells whose expected count
/// falls below min_expected are pooled (in order) into the following cells,
/// keeping the test valid for sparse supports.
ChiSquareResult chi_square_goodness_of_fit(std::span<const std::uint64_t> observed,
                                           std::span<const double> probability,
                                           double min_expected = 5.0);

/// Two-sample chi-square homogeneity test on paired cell counts,
/// with the same in-order pooling rule applied to the combined expectation.
ChiSquareResult chi_square_two_sample(std::span<const std::uint64_t> sample_a,
                                      std::span<const std::uint64_t> sample_b,
                                      double min_expected = 5.0);

/// Total variation distance between an empirical distribution (counts / n)
/// and a reference distribution over the same cells.
double total_variation(std::span<const std::uint64_t> observed,
                       std::span<const double> probability);

}  // namespace cojump

#endif  // COJUMP_STATS_HPP
