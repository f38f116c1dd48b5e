// Acceptance suite: every release-gating property of the co-jump engine,
// with pinned tolerances. Prints one line per criterion and exits nonzero if
// any of them fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "cojump/csv.hpp"
#include "cojump/models.hpp"
#include "cojump/moments.hpp"
#include "cojump/simulator.hpp"
#include "cojump/verify.hpp"

using namespace cojump;

namespace {

struct CriterionResult {
  int id;
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

std::vector<CriterionResult> g_results;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  g_results.push_back({id, name, pass, detail, seconds});
  std::printf("[%s] %d. %s (%s) [%.1fs]\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str(), seconds);
  std::fflush(stdout);
}

double relative_error(double value, double reference) {
  if (reference == 0.0) return value == 0.0 ? 0.0 : 1.0;
  return std::abs(value - reference) / std::abs(reference);
}

const std::vector<double> kGrid{0.1, 0.5, 1.0, 2.0};

// Criterion 1: the covariance of each noisy pair, evaluated by summing
// k1*k2*q over the eager table, equals the closed form to 1e-8 relative for
// every y1,y2 in 0..12 and (delta,tau) on the grid.
void criterion_covariance_identity() {
  const Timer timer;
  double worst = 0.0;
  std::string worst_at;
  for (const double delta : kGrid) {
    for (const double tau : kGrid) {
      for (int y1 = 0; y1 <= 12; ++y1) {
        for (int y2 = 0; y2 <= 12; ++y2) {
          const GammaNoiseParams noise{tau};
          const PairwiseRateTable table = PairwiseRateTable::build(y1, y2, delta, noise);
          const double err =
              relative_error(covariance_by_summation(table),
                             cojump_covariance_closed_form(y1, y2, delta, noise));
          if (err > worst) {
            worst = err;
            worst_at = "y=(" + std::to_string(y1) + "," + std::to_string(y2) +
                       ") delta=" + format_general(delta) + " tau=" + format_general(tau);
          }
        }
      }
    }
  }
  const bool pass = worst <= 1e-8;
  report(1, "covariance summation equals closed form", pass,
         "max rel err " + format_general(worst) + " at " + worst_at, timer.seconds());
}

// Criterion 2: pairwise rates sum to the closed-form total, 1e-9 relative,
// on the grid and for pool totals up to 300 at delta = tau = 1.
void criterion_normalization() {
  const Timer timer;
  double worst = 0.0;
  std::string worst_at;
  const auto check = [&](int y1, int y2, double delta, double tau) {
    const PairwiseRateTable table =
        PairwiseRateTable::build(y1, y2, delta, GammaNoiseParams{tau});
    const double err = relative_error(table.total(), table.closed_form_total());
    if (err > worst) {
      worst = err;
      worst_at = "y=(" + std::to_string(y1) + "," + std::to_string(y2) + ") delta=" +
                 format_general(delta) + " tau=" + format_general(tau);
    }
  };
  for (const double delta : kGrid) {
    for (const double tau : kGrid) {
      for (int y1 = 0; y1 <= 12; ++y1) {
        for (int y2 = 0; y2 <= 12; ++y2) check(y1, y2, delta, tau);
      }
    }
  }
  for (const int total : {50, 100, 150, 200, 250, 300}) {
    check(total / 2, total - total / 2, 1.0, 1.0);
    check(total, 0, 1.0, 1.0);
    check(total / 4, total - total / 4, 1.0, 1.0);
  }
  const bool pass = worst <= 1e-9;
  report(2, "pairwise rates normalize to the closed-form total", pass,
         "max rel err " + format_general(worst) + " at " + worst_at, timer.seconds());
}

// Criterion 3: the co-jump chain, the explicit gamma time-change, and the
// quadrature oracle agree on the one-step law at (5,5).
void criterion_time_change_equivalence() {
  const Timer timer;
  OracleOptions options;
  options.y1 = 5;
  options.y2 = 5;
  options.delta = 0.5;
  options.tau = 0.5;
  options.h = 0.1;
  options.replicates = 100'000;
  options.seed = 31415;
  options.min_p_value = 0.001;
  options.max_total_variation = 0.01;
  const SuiteResult suite = verify_oracle(options);
  std::string detail;
  for (const CheckRow& row : suite.rows) {
    if (!detail.empty()) detail += "; ";
    detail += row.check + "=" + format_general(row.observed);
  }
  report(3, "time-change equivalence of the one-step law", suite.pass, detail,
         timer.seconds());
}

// Criterion 4: Monte Carlo infinitesimal covariance of the bivariate pair at
// (20,20), delta=0.5, tau=0.2, h=0.01, 1e5 replicates, within 3 standard
// errors of the closed form.
void criterion_mc_covariance_bivariate() {
  const Timer timer;
  const BivariateDeathParams params{20, 20, 0.5, 0.2};
  const SystemSpec spec = bivariate_death_system(params);
  const StateVector init = bivariate_death_initial_state(spec, params);
  const MomentEstimate est = estimate_infinitesimal_covariance(
      spec, init, spec.transition_index("Y1", "D"), spec.transition_index("Y2", "D"),
      0.01, 100'000, RngStream{27182, 0});
  const double closed =
      cojump_covariance_closed_form(20, 20, 0.5, GammaNoiseParams{0.2});
  const double z = z_score(est.value, est.std_error, closed);
  const bool pass = std::abs(z) <= 3.0;
  report(4, "bivariate MC covariance matches the closed form", pass,
         "estimate " + format_general(est.value) + " +- " + format_general(est.std_error) +
             " vs " + format_general(closed) + ", z=" + format_general(z),
         timer.seconds());
}

// Criterion 5: the same Monte Carlo check for the strain-1 pair of the
// two-strain system at its default initial state.
void criterion_mc_covariance_sir() {
  const Timer timer;
  const SirParams params = default_sir_params();
  const SystemSpec spec = multistrain_sir_system(params);
  const StateVector init = spec.make_state(default_sir_init());
  const double lambda1 = strain_force_of_infection(init, params, 1);
  const double closed = cojump_covariance_closed_form(
      static_cast<int>(init[kS]), static_cast<int>(init[kS1]), lambda1,
      GammaNoiseParams{params.tau});
  const MomentEstimate est = estimate_infinitesimal_covariance(
      spec, init, spec.require_transition("S->I1"), spec.require_transition("S1->I1*"),
      0.002, 100'000, RngStream{16180, 0});
  const double z = z_score(est.value, est.std_error, closed);
  const bool pass = std::abs(z) <= 3.0;
  report(5, "two-strain MC covariance matches the closed form", pass,
         "estimate " + format_general(est.value) + " +- " + format_general(est.std_error) +
             " vs " + format_general(closed) + ", z=" + format_general(z),
         timer.seconds());
}

// Criterion 6: the rate function never exceeds its static bound along
// simulated trajectories of either model.
void criterion_rate_bounds() {
  const Timer timer;
  RunConfig sir;
  sir.model = ModelKind::multistrain_sir;
  sir.sir = default_sir_params();
  sir.init = default_sir_init();
  BoundsOptions options;
  options.states = 1000;
  options.seed = 99991;
  options.t_end = 30.0;
  const SuiteResult sir_suite = verify_bounds(sir, options);

  RunConfig bivariate;
  bivariate.model = ModelKind::bivariate_death;
  bivariate.bivariate = {20, 20, 0.5, 0.2};
  bivariate.init = {{"Y1", 20}, {"Y2", 20}};
  options.seed = 99992;
  const SuiteResult biv_suite = verify_bounds(bivariate, options);

  double worst = 0.0;
  for (const SuiteResult* s : {&sir_suite, &biv_suite}) {
    for (const CheckRow& row : s->rows) {
      if (row.check == "rate_bound") worst = std::max(worst, row.observed);
    }
  }
  const bool pass = sir_suite.pass && biv_suite.pass;
  report(6, "rate function stays under its static bound", pass,
         "2x1000 states, worst lambda/bound = " + format_general(worst),
         timer.seconds());
}

// Criterion 7: at tau = 1e-6 the single-jump rates match the noiseless rates
// to 1e-3 relative, and covariance/tau approaches y1*y2*delta^2.
void criterion_independence_limit() {
  const Timer timer;
  constexpr double kTau = 1e-6;
  const GammaNoiseParams noise{kTau};
  double worst = 0.0;
  std::string worst_at;
  const auto track = [&](double err, const std::string& what) {
    if (err > worst) {
      worst = err;
      worst_at = what;
    }
  };

  for (const auto& [y1, y2] : {std::pair{1, 1}, std::pair{7, 9}, std::pair{12, 12}}) {
    for (const double delta : {0.5, 1.0, 2.0}) {
      double m1 = 0.0;  // size-1 marginal of the first member
      for (int k2 = 0; k2 <= y2; ++k2) {
        m1 += pairwise_cojump_rate(y1, y2, 1, k2, delta, noise);
      }
      track(relative_error(m1, delta * y1), "bivariate marginal");
      track(relative_error(
                cojump_covariance_closed_form(y1, y2, delta, noise) / kTau,
                static_cast<double>(y1) * static_cast<double>(y2) * delta * delta),
            "covariance/tau");
    }
  }

  SirParams params = default_sir_params();
  params.tau = kTau;
  const SystemSpec spec = multistrain_sir_system(params);
  const StateVector init = spec.make_state(default_sir_init());
  const double lambda1 = strain_force_of_infection(init, params, 1);
  const double lambda2 = strain_force_of_infection(init, params, 2);
  track(relative_error(marginal_rate(spec, init, "S", "I1", 1),
                       lambda1 * static_cast<double>(init[kS])),
        "S->I1 marginal");
  track(relative_error(marginal_rate(spec, init, "S", "I2", 1),
                       lambda2 * static_cast<double>(init[kS])),
        "S->I2 marginal");
  track(relative_error(marginal_rate(spec, init, "I1", "S1", 1),
                       params.r * static_cast<double>(init[kI1])),
        "I1->S1 marginal");
  track(relative_error(marginal_rate(spec, init, "S", "D", 1),
                       params.m * static_cast<double>(init[kS])),
        "S->D marginal");
  track(relative_error(marginal_rate(spec, init, "B", "S", 1),
                       params.m * static_cast<double>(params.P)),
        "B->S marginal");

  const bool pass = worst <= 1e-3;
  report(7, "vanishing noise recovers the noiseless rates", pass,
         "max rel err " + format_general(worst) + " (" + worst_at + ")",
         timer.seconds());
}

// Criterion 8: mass conservation as an exact integer identity on recorded
// trajectories of both models, and byte-identical seeded reruns (including
// worker-count independence of the estimators).
void criterion_exact_invariants() {
  const Timer timer;
  bool pass = true;
  std::string detail = "trajectories validated; reruns byte-identical";

  try {
    const BivariateDeathParams bp{20, 20, 0.5, 0.2};
    const SystemSpec biv = bivariate_death_system(bp);
    const StateVector biv_init = bivariate_death_initial_state(biv, bp);
    for (std::uint64_t stream = 0; stream < 5; ++stream) {
      const Trajectory traj = simulate(biv, biv_init, 50.0, RngStream{777, stream});
      validate_trajectory(biv, traj);
    }

    const SirParams sp = default_sir_params();
    const SystemSpec sir = multistrain_sir_system(sp);
    const StateVector sir_init = sir.make_state(default_sir_init());
    for (std::uint64_t stream = 0; stream < 3; ++stream) {
      const Trajectory traj = simulate(sir, sir_init, 5.0, RngStream{778, stream});
      validate_trajectory(sir, traj);
    }

    // Byte-identical rerun of a full trajectory serialization.
    const auto render = [&](RngStream s) {
      const Trajectory traj = simulate(sir, sir_init, 3.0, s);
      std::ostringstream os;
      write_trajectory_csv(os, sir, traj);
      return os.str();
    };
    if (render(RngStream{4242, 1}) != render(RngStream{4242, 1})) {
      pass = false;
      detail = "trajectory rerun differed";
    }

    // Estimator determinism across worker counts.
    EstimateOptions one;
    one.threads = 1;
    EstimateOptions four;
    four.threads = 4;
    const MomentEstimate a = estimate_infinitesimal_covariance(
        biv, biv_init, 0, 1, 0.01, 20000, RngStream{555, 0}, one);
    const MomentEstimate b = estimate_infinitesimal_covariance(
        biv, biv_init, 0, 1, 0.01, 20000, RngStream{555, 0}, four);
    if (a.value != b.value || a.std_error != b.std_error) {
      pass = false;
      detail = "estimator outcome depends on the worker count";
    }
  } catch (const std::exception& e) {
    pass = false;
    detail = e.what();
  }

  report(8, "exact mass conservation and seeded determinism", pass, detail,
         timer.seconds());
}

}  // namespace

int main() {
  criterion_covariance_identity();
  criterion_normalization();
  criterion_time_change_equivalence();
  criterion_mc_covariance_bivariate();
  criterion_mc_covariance_sir();
  criterion_rate_bounds();
  criterion_independence_limit();
  criterion_exact_invariants();

  int failures = 0;
  for (const CriterionResult& r : g_results) {
    if (!r.pass) ++failures;
  }
  std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(g_results.size()) - failures,
              g_results.size());
  return failures == 0 ? 0 : 1;
}
