#include "cojump/rates.hpp"

#include <gmp.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "cojump/errors.hpp"

namespace cojump {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Internal bar for trusting the double-precision path. Far below every
// tolerance the rates feed into, so escalation happens long before results
// could drift.
constexpr double kEscalateRel = 1e-12;

void check_rate_params(double delta, double tau) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw ConfigError("per-capita rate must be finite and nonnegative");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ConfigError("noise magnitude tau must be finite and positive");
  }
}

// f(j) = tau^-1 log1p(delta*tau*(m-j)); the ladder differences this sequence.
double log_term(int m, int j, double delta, double tau) {
  return std::log1p(delta * tau * static_cast<double>(m - j)) / tau;
}

// A-priori lower bound on |D_n| in log2, from the mean-value form of the
// n-th difference of x -> tau^-1 log1p(delta*tau*x) on [m-n, m]:
//   |D_n| >= (n-1)! (delta*tau)^n / (tau (1+delta*tau*m)^n).
double log2_lower_bound(int n, int m, double delta, double tau) {
  const double dt = delta * tau;
  return (std::lgamma(static_cast<double>(n)) + n * std::log(dt) -
          n * std::log1p(dt * m) - std::log(tau)) /
         std::numbers::ln2_v<double>;
}

// Precision that certifies |D_n| against the cancellation of terms bounded
// by 2^n * max_j |f_j|.
mpfr_prec_t required_precision(int n, double log2_max_f, double log2_lb) {
  const double need = std::log2(8.0 * (n + 1)) + n + log2_max_f - log2_lb + 64.0;
  const double clamped = std::clamp(need, 192.0, 4194304.0);
  return static_cast<mpfr_prec_t>(clamped);
}

// RAII block of mpfr numbers.
class MpfrArray {
 public:
  MpfrArray(std::size_t count, mpfr_prec_t prec) : v_(count) {
    for (auto& x : v_) mpfr_init2(&x, prec);
  }
  ~MpfrArray() {
    for (auto& x : v_) mpfr_clear(&x);
  }
  MpfrArray(const MpfrArray&) = delete;
  MpfrArray& operator=(const MpfrArray&) = delete;

  mpfr_ptr operator[](std::size_t i) { return &v_[i]; }
  std::size_t size() const { return v_.size(); }

 private:
  std::vector<__mpfr_struct> v_;
};

// Fills f[j] = tau^-1 log1p(delta*tau*(m-j)) for j = 0..m at full precision.
void fill_log_terms(MpfrArray& f, int m, double delta, double tau, mpfr_prec_t prec) {
  MpfrArray t(1, prec);
  for (int j = 0; j <= m; ++j) {
    mpfr_set_d(t[0], delta, MPFR_RNDN);
    mpfr_mul_d(t[0], t[0], tau, MPFR_RNDN);
    mpfr_mul_ui(t[0], t[0], static_cast<unsigned long>(m - j), MPFR_RNDN);
    mpfr_log1p(t[0], t[0], MPFR_RNDN);
    mpfr_div_d(f[static_cast<std::size_t>(j)], t[0], tau, MPFR_RNDN);
  }
}

struct LadderCheck {
  bool ok;
  mpfr_prec_t needed;
};

// Verifies the realized ladder values against the rounding budget of the
// triangular pass at precision `prec`; reports the precision that would
// certify every value.
LadderCheck verify_ladder(const std::vector<double>& d, int m, double log2_max_f,
                          mpfr_prec_t prec) {
  LadderCheck res{true, prec};
  for (int n = 1; n <= m; ++n) {
    const double dn = d[static_cast<std::size_t>(n)];
    const double log2_dn = dn > 0.0 ? std::log2(dn) : -1.0e9;
    const double log2_err = std::log2(8.0 * (n + 1)) + n + log2_max_f -
                            static_cast<double>(prec);
    if (log2_err > log2_dn - 50.0) {
      res.ok = false;
      const double need = std::log2(8.0 * (n + 1)) + n + log2_max_f - log2_dn + 64.0;
      res.needed = std::max(res.needed,
                            static_cast<mpfr_prec_t>(std::clamp(need, 192.0, 4194304.0)));
    }
  }
  return res;
}

// Full difference ladder in extended precision; one triangular pass yields
// D_n for all n = 1..m.
std::vector<double> ladder_extended(int m, double delta, double tau,
                                    mpfr_prec_t prec) {
  std::vector<double> d(static_cast<std::size_t>(m) + 1, 0.0);
  MpfrArray w(static_cast<std::size_t>(m) + 1, prec);
  fill_log_terms(w, m, delta, tau, prec);
  for (int n = 1; n <= m; ++n) {
    for (int j = 0; j <= m - n; ++j) {
      // w[j] <- w[j+1] - w[j]; after n sweeps w[0] = Delta^n f(0) = -D_n.
      mpfr_sub(w[static_cast<std::size_t>(j)], w[static_cast<std::size_t>(j) + 1],
               w[static_cast<std::size_t>(j)], MPFR_RNDN);
    }
    d[static_cast<std::size_t>(n)] = -mpfr_get_d(w[0], MPFR_RNDN);
  }
  return d;
}

// Single-n alternating binomial sum in extended precision.
double fdl_extended(int n, int m, double delta, double tau, mpfr_prec_t prec) {
  MpfrArray acc(3, prec);  // sum, term, binomial
  mpfr_set_zero(acc[0], 1);
  mpz_t binom;
  mpz_init(binom);
  for (int j = 0; j <= n; ++j) {
    mpz_bin_uiui(binom, static_cast<unsigned long>(n), static_cast<unsigned long>(j));
    mpfr_set_d(acc[1], delta, MPFR_RNDN);
    mpfr_mul_d(acc[1], acc[1], tau, MPFR_RNDN);
    mpfr_mul_ui(acc[1], acc[1], static_cast<unsigned long>(m - j), MPFR_RNDN);
    mpfr_log1p(acc[1], acc[1], MPFR_RNDN);
    mpfr_div_d(acc[1], acc[1], tau, MPFR_RNDN);
    mpfr_set_z(acc[2], binom, MPFR_RNDN);
    mpfr_mul(acc[1], acc[1], acc[2], MPFR_RNDN);
    if (((n - j + 1) & 1) != 0) {
      mpfr_sub(acc[0], acc[0], acc[1], MPFR_RNDN);
    } else {
      mpfr_add(acc[0], acc[0], acc[1], MPFR_RNDN);
    }
  }
  mpz_clear(binom);
  return mpfr_get_d(acc[0], MPFR_RNDN);
}

}  // namespace

namespace detail {

void CompensatedSum::add(double term) {
  abs_sum += std::abs(term);
  const double t = sum + term;
  if (std::abs(sum) >= std::abs(term)) {
    compensation += (sum - t) + term;
  } else {
    compensation += (term - t) + sum;
  }
  sum = t;
}

double CompensatedSum::error_estimate() const {
  // Dominated by the rounding already present in the terms themselves; the
  // Neumaier correction removes almost all summation-order error.
  return 8.0 * kEps * abs_sum;
}

std::vector<double> difference_ladder(int m, double delta, double tau) {
  check_rate_params(delta, tau);
  std::vector<double> d(static_cast<std::size_t>(m) + 1, 0.0);
  if (m == 0 || delta == 0.0) return d;

  // Double-precision triangular pass with per-entry error propagation.
  std::vector<double> w(static_cast<std::size_t>(m) + 1);
  std::vector<double> err(static_cast<std::size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) {
    w[static_cast<std::size_t>(j)] = log_term(m, j, delta, tau);
    err[static_cast<std::size_t>(j)] = 4.0 * kEps * std::abs(w[static_cast<std::size_t>(j)]);
  }
  bool all_ok = true;
  for (int n = 1; n <= m; ++n) {
    for (int j = 0; j <= m - n; ++j) {
      const double v = w[static_cast<std::size_t>(j) + 1] - w[static_cast<std::size_t>(j)];
      err[static_cast<std::size_t>(j)] = err[static_cast<std::size_t>(j) + 1] +
                                         err[static_cast<std::size_t>(j)] +
                                         kEps * std::abs(v);
      w[static_cast<std::size_t>(j)] = v;
    }
    const double dn = -w[0];
    d[static_cast<std::size_t>(n)] = dn;
    if (!(err[0] <= kEscalateRel * std::abs(dn))) all_ok = false;
  }
  if (all_ok) return d;

  // Escalate: rebuild the whole ladder in extended precision, sized from the
  // a-priori lower bound on the smallest surviving difference.
  const double log2_max_f = std::log2(log_term(m, 0, delta, tau));
  mpfr_prec_t prec = 192;
  for (int n = 1; n <= m; ++n) {
    prec = std::max(prec, required_precision(n, log2_max_f,
                                             log2_lower_bound(n, m, delta, tau)));
  }
  for (int attempt = 0; attempt < 4; ++attempt) {
    d = ladder_extended(m, delta, tau, prec);
    const LadderCheck check = verify_ladder(d, m, log2_max_f, prec);
    if (check.ok) return d;
    prec = std::max(check.needed, prec * 2);
  }
  throw PrecisionLoss("difference ladder did not converge at m = " + std::to_string(m));
}

}  // namespace detail

double finite_difference_log(int n, int m, double delta, double tau) {
  check_rate_params(delta, tau);
  if (n < 1 || n > m) {
    throw InvalidJumpSize("finite_difference_log requires 1 <= n <= m");
  }
  if (delta == 0.0) return 0.0;

  // Compensated double-precision path.
  const std::span<const double> binom = binomial_row(n);
  detail::CompensatedSum acc;
  for (int j = 0; j <= n; ++j) {
    const double f = log_term(m, j, delta, tau);
    const double term = binom[static_cast<std::size_t>(j)] * f;
    acc.add(((n - j + 1) & 1) != 0 ? -term : term);
  }
  const double value = acc.value();
  if (acc.error_estimate() <= kEscalateRel * std::abs(value)) {
    return value;
  }

  // Extended precision, verified against the realized magnitude.
  const double log2_max_f = std::log2(log_term(m, 0, delta, tau));
  mpfr_prec_t prec =
      required_precision(n, log2_max_f, log2_lower_bound(n, m, delta, tau));
  for (int attempt = 0; attempt < 4; ++attempt) {
    const double v = fdl_extended(n, m, delta, tau, prec);
    const double log2_v = v > 0.0 ? std::log2(v) : -1.0e9;
    const double log2_err =
        std::log2(8.0 * (n + 1)) + n + log2_max_f - static_cast<double>(prec);
    if (log2_err <= log2_v - 50.0) return v;
    prec = std::max(prec * 2, required_precision(n, log2_max_f, log2_v));
  }
  throw PrecisionLoss("finite_difference_log did not converge at n = " +
                      std::to_string(n) + ", m = " + std::to_string(m));
}

double pairwise_cojump_rate(int y1, int y2, int k1, int k2, double delta,
                            GammaNoiseParams noise) {
  if (k1 < 0 || k2 < 0 || (k1 == 0 && k2 == 0)) {
    throw InvalidJumpSize("co-jump size (k1,k2) must be nonnegative and not (0,0)");
  }
  if (k1 > y1 || k2 > y2) {
    throw InvalidJumpSize("co-jump size exceeds source occupancy: (" +
                          std::to_string(k1) + "," + std::to_string(k2) +
                          ") from (" + std::to_string(y1) + "," +
                          std::to_string(y2) + ")");
  }
  const double d = finite_difference_log(k1 + k2, y1 + y2, delta, noise.tau);
  const double rate = binomial_coefficient(y1, k1) * binomial_coefficient(y2, k2) * d;
  if (rate < 0.0) {
    const double total = total_cojump_rate(y1, y2, delta, noise);
    if (-rate <= 1e-12 * total) return 0.0;
    throw PrecisionLoss("pairwise rate negative beyond clamping threshold");
  }
  return rate;
}

double total_cojump_rate(int y1, int y2, double delta, GammaNoiseParams noise) {
  check_rate_params(delta, noise.tau);
  return std::log1p(delta * noise.tau * static_cast<double>(y1 + y2)) / noise.tau;
}

double cojump_covariance_closed_form(int y1, int y2, double delta,
                                     GammaNoiseParams noise) {
  check_rate_params(delta, noise.tau);
  const double dt = delta * noise.tau;
  // (1+dt)^2/(1+2dt) = 1 + dt^2/(1+2dt); log1p keeps full accuracy as dt -> 0.
  const double log_ratio = std::log1p(dt * dt / (1.0 + 2.0 * dt));
  return static_cast<double>(y1) * static_cast<double>(y2) * log_ratio / noise.tau;
}

PairwiseRateTable PairwiseRateTable::build(int y1, int y2, double delta,
                                           GammaNoiseParams noise,
                                           int population_cap) {
  check_rate_params(delta, noise.tau);
  if (y1 < 0 || y2 < 0) throw ConfigError("source occupancies must be nonnegative");
  if (y1 > population_cap || y2 > population_cap) {
    throw ConfigError("source occupancy " + std::to_string(std::max(y1, y2)) +
                      " exceeds the population cap " + std::to_string(population_cap));
  }

  PairwiseRateTable t;
  t.y1_ = y1;
  t.y2_ = y2;
  t.delta_ = delta;
  t.tau_ = noise.tau;
  t.closed_form_total_ = total_cojump_rate(y1, y2, delta, noise);

  const int m = y1 + y2;
  const std::vector<double> ladder = detail::difference_ladder(m, delta, noise.tau);
  const std::span<const double> row1 = binomial_row(y1);
  const std::span<const double> row2 = binomial_row(y2);

  const std::size_t width = static_cast<std::size_t>(y2) + 1;
  t.rates_.assign((static_cast<std::size_t>(y1) + 1) * width, 0.0);
  detail::CompensatedSum sum;
  for (int k1 = 0; k1 <= y1; ++k1) {
    for (int k2 = 0; k2 <= y2; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      double r = row1[static_cast<std::size_t>(k1)] *
                 row2[static_cast<std::size_t>(k2)] *
                 ladder[static_cast<std::size_t>(k1 + k2)];
      if (r < 0.0) {
        if (-r <= 1e-12 * t.closed_form_total_) {
          r = 0.0;
        } else {
          throw PrecisionLoss("pairwise rate negative beyond clamping threshold at (" +
                              std::to_string(k1) + "," + std::to_string(k2) + ")");
        }
      }
      t.rates_[static_cast<std::size_t>(k1) * width + static_cast<std::size_t>(k2)] = r;
      sum.add(r);
    }
  }
  t.total_ = sum.value();

  t.cumulative_.resize(t.rates_.size());
  double running = 0.0;
  for (std::size_t i = 0; i < t.rates_.size(); ++i) {
    running += t.rates_[i];
    t.cumulative_[i] = running;
  }
  return t;
}

double PairwiseRateTable::rate(int k1, int k2) const {
  if (k1 < 0 || k2 < 0 || k1 > y1_ || k2 > y2_) return 0.0;
  return rates_[static_cast<std::size_t>(k1) * (static_cast<std::size_t>(y2_) + 1) +
                static_cast<std::size_t>(k2)];
}

std::pair<int, int> PairwiseRateTable::sample(double u) const {
  const double target = u * total_;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
  if (idx >= rates_.size()) idx = rates_.size() - 1;
  // Skip any zero-rate cell the search may have landed on.
  while (idx + 1 < rates_.size() && rates_[idx] == 0.0) ++idx;
  const std::size_t width = static_cast<std::size_t>(y2_) + 1;
  return {static_cast<int>(idx / width), static_cast<int>(idx % width)};
}

double covariance_by_summation(const PairwiseRateTable& table) {
  detail::CompensatedSum sum;
  for (int k1 = 1; k1 <= table.y1(); ++k1) {
    for (int k2 = 1; k2 <= table.y2(); ++k2) {
      sum.add(static_cast<double>(k1) * static_cast<double>(k2) * table.rate(k1, k2));
    }
  }
  return sum.value();
}

}  // namespace cojump
