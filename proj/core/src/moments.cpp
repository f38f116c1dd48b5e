#include "cojump/moments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "cojump/binomial.hpp"
#include "cojump/csv.hpp"
#include "cojump/errors.hpp"
#include "cojump/parallel.hpp"
#include "cojump/quadrature.hpp"

namespace cojump {

namespace {

void check_estimation_inputs(const SystemSpec& spec, const StateVector& state,
                             double h, std::uint64_t replicates) {
  if (replicates < 1000) {
    throw ConfigError("moment estimation requires at least 1000 replicates");
  }
  const double lambda = rate_function(spec, state);
  if (!(h > 0.0)) throw ConfigError("window length h must be positive");
  if (h * lambda > 0.1) {
    throw StepTooLarge("h * rate_function = " + std::to_string(h * lambda) +
                       " exceeds the small-step precondition 0.1");
  }
}

struct BatchStats {
  double value = 0.0;
};

MomentEstimate reduce_batches(const std::vector<double>& batch_values,
                              std::uint64_t replicates, double h, MomentKind kind) {
  const double b = static_cast<double>(batch_values.size());
  double mean = 0.0;
  for (const double v : batch_values) mean += v;
  mean /= b;
  double ss = 0.0;
  for (const double v : batch_values) ss += (v - mean) * (v - mean);
  MomentEstimate est;
  est.value = mean;
  est.std_error = b > 1 ? std::sqrt(ss / (b * (b - 1.0))) : 0.0;
  est.replicates = replicates;
  est.h = h;
  est.kind = kind;
  return est;
}

}  // namespace

MomentEstimate estimate_infinitesimal_covariance(const SystemSpec& spec,
                                                 const StateVector& state,
                                                 int transition_a, int transition_b,
                                                 double h, std::uint64_t replicates,
                                                 RngStream rng, EstimateOptions options) {
  check_estimation_inputs(spec, state, h, replicates);
  if (transition_a < 0 || transition_b < 0 ||
      static_cast<std::size_t>(transition_a) >= spec.transition_count() ||
      static_cast<std::size_t>(transition_b) >= spec.transition_count()) {
    throw UnknownTransition("transition index out of range");
  }
  const std::uint64_t batches =
      std::max<std::uint64_t>(2, std::min(options.batches, replicates / 10));
  std::vector<double> batch_values(batches, 0.0);

  parallel_chunks(batches, options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const std::uint64_t r0 = replicates * b / batches;
      const std::uint64_t r1 = replicates * (b + 1) / batches;
      const double n = static_cast<double>(r1 - r0);
      double sx = 0.0, sy = 0.0, sxy = 0.0;
      for (std::uint64_t r = r0; r < r1; ++r) {
        Rng replicate_rng(RngStream{rng.seed, rng.stream + r});
        const WindowResult w =
            run_window(spec, state, h, replicate_rng, options.event_budget);
        const double x = static_cast<double>(w.counts[static_cast<std::size_t>(transition_a)]);
        const double y = static_cast<double>(w.counts[static_cast<std::size_t>(transition_b)]);
        sx += x;
        sy += y;
        sxy += x * y;
      }
      // Unbiased sample covariance of the increment pair, scaled to a rate.
      batch_values[b] = (sxy - sx * sy / n) / (n - 1.0) / h;
    }
  });
  return reduce_batches(batch_values, replicates, h, MomentKind::covariance);
}

MomentEstimate estimate_infinitesimal_mean(const SystemSpec& spec,
                                           const StateVector& state, int transition,
                                           double h, std::uint64_t replicates,
                                           RngStream rng, EstimateOptions options) {
  check_estimation_inputs(spec, state, h, replicates);
  if (transition < 0 || static_cast<std::size_t>(transition) >= spec.transition_count()) {
    throw UnknownTransition("transition index out of range");
  }
  const std::uint64_t batches =
      std::max<std::uint64_t>(2, std::min(options.batches, replicates / 10));
  std::vector<double> batch_values(batches, 0.0);

  parallel_chunks(batches, options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const std::uint64_t r0 = replicates * b / batches;
      const std::uint64_t r1 = replicates * (b + 1) / batches;
      double sum = 0.0;
      for (std::uint64_t r = r0; r < r1; ++r) {
        Rng replicate_rng(RngStream{rng.seed, rng.stream + r});
        const WindowResult w =
            run_window(spec, state, h, replicate_rng, options.event_budget);
        sum += static_cast<double>(w.counts[static_cast<std::size_t>(transition)]);
      }
      batch_values[b] = sum / static_cast<double>(r1 - r0) / h;
    }
  });
  return reduce_batches(batch_values, replicates, h, MomentKind::mean);
}

std::map<std::pair<Count, Count>, double> one_step_distribution_oracle(
    std::pair<Count, Count> y0, double delta, GammaNoiseParams noise, double h) {
  const Count y1 = y0.first;
  const Count y2 = y0.second;
  if (y1 < 0 || y2 < 0 || y1 > 30 || y2 > 30) {
    throw ConfigError("one-step oracle supports pools of at most 30");
  }
  if (!(h > 0.0)) throw ConfigError("window length h must be positive");
  if (!(delta >= 0.0)) throw ConfigError("delta must be nonnegative");
  if (!(noise.tau > 0.0)) throw ConfigError("tau must be positive");

  std::map<std::pair<Count, Count>, double> dist;
  if (delta == 0.0 || (y1 == 0 && y2 == 0)) {
    dist[{0, 0}] = 1.0;
    return dist;
  }

  const double a = h / noise.tau;
  const double tau = noise.tau;
  // Joint binomial mixture mass at operational time g.
  const auto mass = [&](double g, Count d1, Count d2) {
    const double p = -std::expm1(-delta * g);
    const double log_survive =
        -delta * g * (static_cast<double>(y1 - d1) + static_cast<double>(y2 - d2));
    return binomial_coefficient(static_cast<int>(y1), static_cast<int>(d1)) *
           binomial_coefficient(static_cast<int>(y2), static_cast<int>(d2)) *
           std::pow(p, static_cast<double>(d1 + d2)) * std::exp(log_survive);
  };

  constexpr double kEntryTol = 1e-12;
  double sum = 0.0;
  for (Count d1 = 0; d1 <= y1; ++d1) {
    for (Count d2 = 0; d2 <= y2; ++d2) {
      QuadratureResult q;
      double base = 0.0;
      if (a >= 1.0) {
        const double w_max = a + 20.0 * std::sqrt(a) + 200.0;
        const double log_norm = -std::lgamma(a);
        q = integrate_gk15(
            [&](double w) {
              if (w <= 0.0) return 0.0;
              return mass(tau * w, d1, d2) *
                     std::exp(log_norm + (a - 1.0) * std::log(w) - w);
            },
            0.0, w_max, kEntryTol);
      } else if (a >= 0.02) {
        // Power-law substitution w = s^(1/a) removes the integrable
        // singularity of the gamma weight at zero:
        //   integral = Gamma(a+1)^-1 int_0^inf F(tau w(s)) exp(-w(s)) ds.
        const double norm = 1.0 / std::tgamma(a + 1.0);
        const double s_max = std::pow(200.0, a);
        q = integrate_gk15(
            [&](double s) {
              const double w = std::pow(s, 1.0 / a);
              return norm * mass(tau * w, d1, d2) * std::exp(-w);
            },
            0.0, s_max, kEntryTol);
      } else {
        // Tiny shape: the substitution squeezes all variation into a needle
        // near s = 1, so instead subtract the g -> 0 limit. The regularized
        // integrand (F(g) - F(0))/g carries the leftover weight g^a, which
        // is numerically flat, and F(0) contributes its exact mass.
        base = (d1 == 0 && d2 == 0) ? 1.0 : 0.0;
        const double log_norm = -std::lgamma(a) - a * std::log(tau);
        const double g_max = 200.0 * tau;
        q = integrate_gk15(
            [&](double g) {
              if (g <= 0.0) return 0.0;
              const double diff = mass(g, d1, d2) - base;
              return (diff / g) * std::exp(log_norm + a * std::log(g) - g / tau);
            },
            0.0, g_max, kEntryTol);
      }
      if (q.abs_error > 1e-10) {
        throw QuadratureFailure("one-step oracle entry exceeded tolerance");
      }
      dist[{d1, d2}] = base + q.value;
      sum += base + q.value;
    }
  }
  if (std::abs(sum - 1.0) > 1e-8) {
    throw QuadratureFailure("one-step oracle mass " + std::to_string(sum) +
                            " deviates from 1 beyond 1e-8");
  }
  return dist;
}

namespace {

BoundReport make_report(double lambda, double lambda_bound, double increment_bound) {
  if (lambda > lambda_bound * (1.0 + 1e-12)) {
    throw BoundViolated("rate " + std::to_string(lambda) +
                        " exceeds its static bound " + std::to_string(lambda_bound));
  }
  BoundReport r;
  r.lambda_at_state = lambda;
  r.static_lambda_bound = lambda_bound;
  r.static_increment_bound = increment_bound;
  r.p3_moment_bound = increment_bound * increment_bound * lambda_bound;
  return r;
}

}  // namespace

BoundReport check_moment_bound(const SystemSpec& spec, const StateVector& state,
                               const BivariateDeathParams& params) {
  const double lambda = rate_function(spec, state);
  const double pool0 = static_cast<double>(params.y1_0 + params.y2_0);
  return make_report(lambda, params.delta * pool0, pool0);
}

BoundReport check_moment_bound(const SystemSpec& spec, const StateVector& state,
                               const SirParams& params) {
  const double lambda = rate_function(spec, state);
  const double lambda_max = params.beta + params.omega;  // all-infected worst case
  const double bound =
      (params.m + params.r + 2.0 * lambda_max) * static_cast<double>(params.P);
  return make_report(lambda, bound, static_cast<double>(params.P));
}

std::uint64_t state_hash(const StateVector& state) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < state.size(); ++i) {
    std::uint64_t v = static_cast<std::uint64_t>(state[i]);
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (v >> (8 * byte)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

double z_score(double estimate, double std_error, double closed_form) {
  const double diff = estimate - closed_form;
  if (std_error == 0.0) {
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return diff / std_error;
}

void write_estimate_report_csv(std::ostream& os,
                               const std::vector<EstimateReportRow>& rows) {
  const std::vector<std::string> header{"model",     "state_hash", "pair",
                                        "h",         "replicates", "estimate",
                                        "std_error", "closed_form", "z_score"};
  write_csv_row(os, header);
  char hash_buf[17];
  for (const EstimateReportRow& r : rows) {
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(r.state_hash));
    const std::vector<std::string> fields{
        r.model,
        hash_buf,
        r.pair,
        format_general(r.h),
        std::to_string(r.replicates),
        format_general(r.estimate),
        format_general(r.std_error),
        format_general(r.closed_form),
        format_general(r.z_score)};
    write_csv_row(os, fields);
  }
}

}  // namespace cojump
