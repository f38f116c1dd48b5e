#include "cojump/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cojump/errors.hpp"

namespace cojump {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min() / kEps;

double gamma_p_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  for (int k = 1; k < 10000; ++k) {
    term *= x / (s + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
    }
  }
  throw Error("incomplete gamma series failed to converge");
}

double gamma_q_continued_fraction(double s, double x) {
  // Modified Lentz evaluation of the standard continued fraction.
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) {
      return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
    }
  }
  throw Error("incomplete gamma continued fraction failed to converge");
}

}  // namespace

double regularized_gamma_q(double s, double x) {
  if (!(s > 0.0) || !(x >= 0.0)) {
    throw std::invalid_argument("regularized_gamma_q requires s > 0, x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
  return gamma_q_continued_fraction(s, x);
}

double chi_square_sf(double statistic, int df) {
  if (df < 1) throw std::invalid_argument("chi_square_sf requires df >= 1");
  if (statistic <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * df, 0.5 * statistic);
}

namespace {

struct PooledCell {
  double observed_a = 0.0;
  double observed_b = 0.0;  // unused in one-sample mode
  double reference = 0.0;   // probability or combined count
};

// Pools consecutive cells until `enough` accepts the running reference mass,
// merging a short final cell into its predecessor.
template <typename Enough>
std::vector<PooledCell> pool_cells(std::span<const std::uint64_t> a,
                                   std::span<const std::uint64_t> b,
                                   std::span<const double> reference,
                                   Enough enough) {
  std::vector<PooledCell> pooled;
  PooledCell current;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    current.observed_a += static_cast<double>(a[i]);
    if (!b.empty()) current.observed_b += static_cast<double>(b[i]);
    current.reference += reference[i];
    if (enough(current.reference)) {
      pooled.push_back(current);
      current = PooledCell{};
    }
  }
  if (current.reference > 0.0 || current.observed_a > 0.0 || current.observed_b > 0.0) {
    if (pooled.empty()) {
      pooled.push_back(current);
    } else {
      pooled.back().observed_a += current.observed_a;
      pooled.back().observed_b += current.observed_b;
      pooled.back().reference += current.reference;
    }
  }
  return pooled;
}

}  // namespace

ChiSquareResult chi_square_goodness_of_fit(std::span<const std::uint64_t> observed,
                                           std::span<const double> probability,
                                           double min_expected) {
  if (observed.size() != probability.size()) {
    throw std::invalid_argument("observed/probability size mismatch");
  }
  double n = 0.0;
  for (const auto o : observed) n += static_cast<double>(o);
  const auto pooled = pool_cells(observed, {}, probability,
                                 [&](double p) { return n * p >= min_expected; });
  if (pooled.size() < 2) return {0.0, 0, 1.0};
  double stat = 0.0;
  for (const PooledCell& cell : pooled) {
    const double expected = n * cell.reference;
    const double diff = cell.observed_a - expected;
    stat += diff * diff / expected;
  }
  const int df = static_cast<int>(pooled.size()) - 1;
  return {stat, df, chi_square_sf(stat, df)};
}

ChiSquareResult chi_square_two_sample(std::span<const std::uint64_t> sample_a,
                                      std::span<const std::uint64_t> sample_b,
                                      double min_expected) {
  if (sample_a.size() != sample_b.size()) {
    throw std::invalid_argument("sample size mismatch");
  }
  double na = 0.0, nb = 0.0;
  std::vector<double> combined(sample_a.size());
  for (std::size_t i = 0; i < sample_a.size(); ++i) {
    na += static_cast<double>(sample_a[i]);
    nb += static_cast<double>(sample_b[i]);
    combined[i] = static_cast<double>(sample_a[i]) + static_cast<double>(sample_b[i]);
  }
  const double total = na + nb;
  const double smaller = std::min(na, nb);
  const auto pooled = pool_cells(sample_a, sample_b, combined, [&](double c) {
    return smaller * c / total >= min_expected;
  });
  if (pooled.size() < 2) return {0.0, 0, 1.0};
  double stat = 0.0;
  for (const PooledCell& cell : pooled) {
    const double ea = na * cell.reference / total;
    const double eb = nb * cell.reference / total;
    const double da = cell.observed_a - ea;
    const double db = cell.observed_b - eb;
    stat += da * da / ea + db * db / eb;
  }
  const int df = static_cast<int>(pooled.size()) - 1;
  return {stat, df, chi_square_sf(stat, df)};
}

double total_variation(std::span<const std::uint64_t> observed,
                       std::span<const double> probability) {
  if (observed.size() != probability.size()) {
    throw std::invalid_argument("observed/probability size mismatch");
  }
  double n = 0.0;
  for (const auto o : observed) n += static_cast<double>(o);
  double tv = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    tv += std::abs(static_cast<double>(observed[i]) / n - probability[i]);
  }
  return 0.5 * tv;
}

}  // namespace cojump
