#include "cojump/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <vector>

#include "cojump/csv.hpp"
#include "cojump/errors.hpp"
#include "cojump/parallel.hpp"
#include "cojump/stats.hpp"

namespace cojump {

namespace {

double relative_error(double value, double reference) {
  if (reference == 0.0) {
    return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::abs(value - reference) / std::abs(reference);
}

std::string describe(double delta, double tau) {
  return "delta=" + format_general(delta) + " tau=" + format_general(tau);
}

}  // namespace

void SuiteResult::add(CheckRow row) {
  pass = pass && row.pass;
  rows.push_back(std::move(row));
}

void write_suite_csv(std::ostream& os, const SuiteResult& result) {
  const std::vector<std::string> header{"check", "detail", "observed", "threshold",
                                        "pass"};
  write_csv_row(os, header);
  for (const CheckRow& row : result.rows) {
    const std::vector<std::string> fields{row.check, row.detail,
                                          format_general(row.observed),
                                          format_general(row.threshold),
                                          row.pass ? "1" : "0"};
    write_csv_row(os, fields);
  }
}

SuiteResult verify_identities(const IdentityOptions& options) {
  SuiteResult result;
  result.suite = "identities";

  constexpr double kCovarianceTol = 1e-8;
  constexpr double kNormalizationTol = 1e-9;

  for (const double delta : options.grid) {
    for (const double tau : options.grid) {
      const GammaNoiseParams noise{tau};
      double worst_cov = 0.0, worst_norm = 0.0;
      int cov_y1 = 0, cov_y2 = 0, norm_y1 = 0, norm_y2 = 0;
      for (int y1 = 0; y1 <= options.y_max; ++y1) {
        for (int y2 = 0; y2 <= options.y_max; ++y2) {
          const PairwiseRateTable table = PairwiseRateTable::build(y1, y2, delta, noise);
          const double cov_err =
              relative_error(covariance_by_summation(table),
                             cojump_covariance_closed_form(y1, y2, delta, noise));
          if (cov_err > worst_cov) {
            worst_cov = cov_err;
            cov_y1 = y1;
            cov_y2 = y2;
          }
          const double norm_err =
              relative_error(table.total(), table.closed_form_total());
          if (norm_err > worst_norm) {
            worst_norm = norm_err;
            norm_y1 = y1;
            norm_y2 = y2;
          }
        }
      }
      result.add({"covariance_identity",
                  describe(delta, tau) + " worst y1=" + std::to_string(cov_y1) +
                      " y2=" + std::to_string(cov_y2),
                  worst_cov, kCovarianceTol, worst_cov <= kCovarianceTol});
      result.add({"normalization",
                  describe(delta, tau) + " worst y1=" + std::to_string(norm_y1) +
                      " y2=" + std::to_string(norm_y2),
                  worst_norm, kNormalizationTol, worst_norm <= kNormalizationTol});
    }
  }

  // Large pools at delta = tau = 1 lean on the extended-precision ladder.
  for (const int total : options.extended_totals) {
    double worst = 0.0;
    std::string worst_detail;
    for (const auto& [y1, y2] : {std::pair{total / 2, total - total / 2},
                                 std::pair{total, 0},
                                 std::pair{total / 4, total - total / 4}}) {
      const PairwiseRateTable table =
          PairwiseRateTable::build(y1, y2, 1.0, GammaNoiseParams{1.0});
      const double err = relative_error(table.total(), table.closed_form_total());
      if (err >= worst) {
        worst = err;
        worst_detail = "y1=" + std::to_string(y1) + " y2=" + std::to_string(y2);
      }
    }
    result.add({"normalization_extended", worst_detail, worst, kNormalizationTol,
                worst <= kNormalizationTol});
  }

  // Noiseless limit: at vanishing tau the pair behaves like two independent
  // linear death processes.
  constexpr double kSmallTau = 1e-6;
  constexpr double kPairwiseTol = 1e-4;
  constexpr double kLimitTol = 1e-3;
  const GammaNoiseParams small_noise{kSmallTau};
  double worst_single = 0.0, worst_cov_limit = 0.0;
  std::string single_detail, cov_detail;
  for (const auto& [y1, y2] : {std::pair{1, 1}, std::pair{7, 9}, std::pair{12, 12},
                               std::pair{5, 0}}) {
    for (const double delta : {0.5, 1.0, 2.0}) {
      if (y1 >= 1) {
        const double single =
            pairwise_cojump_rate(y1, y2, 1, 0, delta, small_noise);
        const double err = relative_error(single, delta * y1);
        if (err > worst_single) {
          worst_single = err;
          single_detail = "y1=" + std::to_string(y1) + " y2=" + std::to_string(y2) +
                          " delta=" + format_general(delta);
        }
      }
      const double cov_over_tau =
          cojump_covariance_closed_form(y1, y2, delta, small_noise) / kSmallTau;
      const double target = static_cast<double>(y1) * static_cast<double>(y2) *
                            delta * delta;
      const double err = target == 0.0 ? std::abs(cov_over_tau)
                                       : relative_error(cov_over_tau, target);
      if (err > worst_cov_limit) {
        worst_cov_limit = err;
        cov_detail = "y1=" + std::to_string(y1) + " y2=" + std::to_string(y2) +
                     " delta=" + format_general(delta);
      }
    }
  }
  result.add({"independence_single_jump", single_detail, worst_single, kPairwiseTol,
              worst_single <= kPairwiseTol});
  result.add({"independence_covariance", cov_detail, worst_cov_limit, kLimitTol,
              worst_cov_limit <= kLimitTol});

  // Same limit on the two-strain system: every size-one marginal approaches
  // its noiseless rate.
  {
    SirParams params = default_sir_params();
    params.tau = kSmallTau;
    const SystemSpec spec = multistrain_sir_system(params);
    const StateVector init = spec.make_state(default_sir_init());
    double worst = 0.0;
    std::string detail;
    const auto check_marginal = [&](const std::string& from, const std::string& to,
                                    double expected) {
      if (expected == 0.0) return;
      const double observed = marginal_rate(spec, init, from, to, 1);
      const double err = relative_error(observed, expected);
      if (err > worst) {
        worst = err;
        detail = from + "->" + to;
      }
    };
    const double lambda1 = strain_force_of_infection(init, params, 1);
    const double lambda2 = strain_force_of_infection(init, params, 2);
    check_marginal("S", "I1", lambda1 * static_cast<double>(init[kS]));
    check_marginal("S", "I2", lambda2 * static_cast<double>(init[kS]));
    check_marginal("I1", "S1", params.r * static_cast<double>(init[kI1]));
    check_marginal("I2", "S2", params.r * static_cast<double>(init[kI2]));
    check_marginal("S", "D", params.m * static_cast<double>(init[kS]));
    check_marginal("I1", "D", params.m * static_cast<double>(init[kI1]));
    check_marginal("B", "S", params.m * static_cast<double>(params.P));
    result.add({"independence_sir_marginals", detail, worst, kLimitTol,
                worst <= kLimitTol});
  }

  return result;
}

SuiteResult verify_oracle(const OracleOptions& options) {
  SuiteResult result;
  result.suite = "oracle";

  const BivariateDeathParams params{options.y1, options.y2, options.delta, options.tau};
  const SystemSpec spec = bivariate_death_system(params);
  const StateVector init = bivariate_death_initial_state(spec, params);
  const int t1 = spec.transition_index("Y1", "D");
  const int t2 = spec.transition_index("Y2", "D");
  const std::size_t width = static_cast<std::size_t>(options.y2) + 1;
  const std::size_t cells = (static_cast<std::size_t>(options.y1) + 1) * width;

  std::vector<std::uint64_t> ctmc(cells, 0);
  std::vector<std::uint64_t> subordinated(cells, 0);
  std::mutex merge_mutex;

  parallel_chunks(options.replicates, options.threads,
                  [&](std::size_t begin, std::size_t end) {
                    std::vector<std::uint64_t> local_ctmc(cells, 0);
                    std::vector<std::uint64_t> local_sub(cells, 0);
                    for (std::size_t r = begin; r < end; ++r) {
                      Rng rng_ctmc(RngStream{options.seed, r});
                      const WindowResult w = run_window(spec, init, options.h, rng_ctmc);
                      const auto d1 = w.counts[static_cast<std::size_t>(t1)];
                      const auto d2 = w.counts[static_cast<std::size_t>(t2)];
                      ++local_ctmc[static_cast<std::size_t>(d1) * width +
                                   static_cast<std::size_t>(d2)];

                      Rng rng_sub(RngStream{options.seed, options.replicates + r});
                      const auto [s1, s2] = simulate_subordinated_bivariate_death(
                          {options.y1, options.y2}, options.delta,
                          GammaNoiseParams{options.tau}, options.h, rng_sub);
                      ++local_sub[static_cast<std::size_t>(s1) * width +
                                  static_cast<std::size_t>(s2)];
                    }
                    const std::lock_guard<std::mutex> lock(merge_mutex);
                    for (std::size_t i = 0; i < cells; ++i) {
                      ctmc[i] += local_ctmc[i];
                      subordinated[i] += local_sub[i];
                    }
                  });

  const auto oracle = one_step_distribution_oracle(
      {options.y1, options.y2}, options.delta, GammaNoiseParams{options.tau}, options.h);
  std::vector<double> probability(cells, 0.0);
  for (const auto& [cell, p] : oracle) {
    probability[static_cast<std::size_t>(cell.first) * width +
                static_cast<std::size_t>(cell.second)] = p;
  }

  const ChiSquareResult two_sample = chi_square_two_sample(ctmc, subordinated);
  result.add({"time_change_two_sample_chi2",
              "stat=" + format_general(two_sample.statistic) +
                  " df=" + std::to_string(two_sample.df),
              two_sample.p_value, options.min_p_value,
              two_sample.p_value > options.min_p_value});

  const double tv_ctmc = total_variation(ctmc, probability);
  result.add({"cojump_vs_quadrature_tv", "co-jump simulator vs oracle", tv_ctmc,
              options.max_total_variation, tv_ctmc <= options.max_total_variation});

  const double tv_sub = total_variation(subordinated, probability);
  result.add({"subordinator_vs_quadrature_tv", "gamma time-change vs oracle", tv_sub,
              options.max_total_variation, tv_sub <= options.max_total_variation});

  const ChiSquareResult gof = chi_square_goodness_of_fit(ctmc, probability);
  result.add({"cojump_vs_quadrature_chi2",
              "stat=" + format_general(gof.statistic) + " df=" + std::to_string(gof.df),
              gof.p_value, options.min_p_value, gof.p_value > options.min_p_value});

  return result;
}

SuiteResult verify_moments(const RunConfig& config, const MomentsOptions& options,
                           std::vector<EstimateReportRow>* report_rows) {
  SuiteResult result;
  result.suite = "moments";

  const SystemSpec spec = build_system(config);
  const StateVector init = initial_state(config, spec);
  const double lambda = rate_function(spec, init);
  const double h = options.h > 0.0 ? options.h
                                   : (lambda > 0.0 ? 0.04 / lambda : 1.0);

  EstimateOptions est_options;
  est_options.threads = options.threads;
  std::uint64_t stream = 0;

  const auto record = [&](const std::string& pair_label, const MomentEstimate& est,
                          double closed_form, const std::string& check) {
    const double z = z_score(est.value, est.std_error, closed_form);
    const bool pass = std::abs(z) <= options.max_abs_z;
    result.add({check,
                pair_label + " estimate=" + format_general(est.value) + " closed=" +
                    format_general(closed_form) + " se=" + format_general(est.std_error),
                z, options.max_abs_z, pass});
    if (report_rows != nullptr) {
      report_rows->push_back({config.model_name(), state_hash(init), pair_label, est.h,
                              est.replicates, est.value, est.std_error, closed_form, z});
    }
  };

  for (const CoJumpFamily& family : spec.cojump_families()) {
    const std::string label =
        spec.transitions()[static_cast<std::size_t>(family.first)].label() + "+" +
        spec.transitions()[static_cast<std::size_t>(family.second)].label();
    const int y1 = static_cast<int>(init[static_cast<std::size_t>(family.source_first)]);
    const int y2 = static_cast<int>(init[static_cast<std::size_t>(family.source_second)]);
    const double delta = family.per_capita_rate(init);
    const double closed =
        cojump_covariance_closed_form(y1, y2, delta, family.noise);

    const MomentEstimate cov = estimate_infinitesimal_covariance(
        spec, init, family.first, family.second, h, options.replicates,
        RngStream{options.seed, stream}, est_options);
    stream += options.replicates;
    record(label, cov, closed, "covariance_estimate");

    // Mean of the first member against the summed marginal rates.
    detail::CompensatedSum target;
    for (int k = 1; k <= y1; ++k) {
      target.add(static_cast<double>(k) * marginal_rate(spec, init, family.first, k));
    }
    const MomentEstimate mean = estimate_infinitesimal_mean(
        spec, init, family.first, h, options.replicates,
        RngStream{options.seed, stream}, est_options);
    stream += options.replicates;
    record(spec.transitions()[static_cast<std::size_t>(family.first)].label(), mean,
           target.value(), "mean_estimate");
  }

  // Unit families never jump together, so their increments decorrelate as
  // h -> 0; check one such pair when the model has two of them.
  if (spec.unit_families().size() >= 2) {
    const UnitFamily& a = spec.unit_families()[0];
    const UnitFamily& b = spec.unit_families()[1];
    const std::string label =
        spec.transitions()[static_cast<std::size_t>(a.transition)].label() + "+" +
        spec.transitions()[static_cast<std::size_t>(b.transition)].label();
    const MomentEstimate cov = estimate_infinitesimal_covariance(
        spec, init, a.transition, b.transition, h, options.replicates,
        RngStream{options.seed, stream}, est_options);
    stream += options.replicates;
    record(label, cov, 0.0, "unit_pair_zero_covariance");
  }

  return result;
}

SuiteResult verify_bounds(const RunConfig& config, const BoundsOptions& options) {
  SuiteResult result;
  result.suite = "bounds";

  const SystemSpec spec = build_system(config);
  const StateVector init = initial_state(config, spec);

  double worst_ratio = 0.0;
  std::string worst_detail = "at init";
  std::uint64_t sampled = 0;
  bool reports_ok = true;
  bool invariants_ok = true;
  std::string failure;

  const auto inspect = [&](const StateVector& state) {
    try {
      const BoundReport report =
          config.model == ModelKind::bivariate_death
              ? check_moment_bound(spec, state, config.bivariate)
              : check_moment_bound(spec, state, config.sir);
      if (report.static_lambda_bound > 0.0) {
        const double ratio = report.lambda_at_state / report.static_lambda_bound;
        if (ratio > worst_ratio) {
          worst_ratio = ratio;
          worst_detail = "lambda=" + format_general(report.lambda_at_state) +
                         " bound=" + format_general(report.static_lambda_bound);
        }
      }
    } catch (const BoundViolated& e) {
      reports_ok = false;
      failure = e.what();
    }
    ++sampled;
  };

  inspect(init);
  std::uint64_t stream = 0;
  while (sampled < options.states) {
    const Trajectory traj =
        simulate(spec, init, options.t_end, RngStream{options.seed, stream++});
    try {
      validate_trajectory(spec, traj);
    } catch (const Error& e) {
      invariants_ok = false;
      failure = e.what();
      break;
    }
    for (const StateVector& state : traj.states) {
      inspect(state);
      if (sampled >= options.states) break;
    }
    if (traj.events.empty()) break;  // absorbed immediately; avoid spinning
  }

  result.add({"rate_bound", worst_detail + " over " + std::to_string(sampled) + " states",
              worst_ratio, 1.0, worst_ratio <= 1.0 && reports_ok});
  result.add({"bound_reports", reports_ok ? "no violations" : failure,
              reports_ok ? 0.0 : 1.0, 0.0, reports_ok});
  result.add({"trajectory_invariants", invariants_ok ? "mass conservation exact" : failure,
              invariants_ok ? 0.0 : 1.0, 0.0, invariants_ok});
  return result;
}

}  // namespace cojump
