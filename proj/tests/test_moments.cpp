#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cojump/errors.hpp"
#include "cojump/moments.hpp"

using namespace cojump;

namespace {

bool within_3se(const MomentEstimate& est, double target) {
  return std::abs(est.value - target) <= 3.0 * est.std_error;
}

}  // namespace

TEST_CASE("one-step oracle basics") {
  SUBCASE("empty pools are a point mass") {
    const auto dist = one_step_distribution_oracle({0, 0}, 1.0, GammaNoiseParams{1.0}, 0.1);
    CHECK(dist.size() == 1);
    CHECK(dist.at({0, 0}) == 1.0);
  }
  SUBCASE("frozen reference values at (5,5)") {
    // Exact values from the finite mixture-of-exponentials closed form,
    // evaluated at 50-digit precision.
    const auto dist =
        one_step_distribution_oracle({5, 5}, 0.5, GammaNoiseParams{0.5}, 0.1);
    CHECK(std::abs(dist.at({0, 0}) - 0.77837054155117081) < 1e-10);
    CHECK(std::abs(dist.at({1, 0}) - 0.058113062690784059) < 1e-10);
    CHECK(std::abs(dist.at({1, 1}) - 0.028144878318656197) < 1e-10);
    CHECK(std::abs(dist.at({2, 1}) - 0.010879294716117284) < 1e-10);
    CHECK(std::abs(dist.at({5, 5}) - 5.8706150199999307e-05) < 1e-12);
    double sum = 0.0;
    for (const auto& [cell, p] : dist) sum += p;
    CHECK(std::abs(sum - 1.0) <= 1e-8);
  }
  SUBCASE("tiny shape h/tau engages the regularized path") {
    const auto dist = one_step_distribution_oracle({1, 1}, 1.0, GammaNoiseParams{1.0}, 1e-4);
    CHECK(std::abs(dist.at({0, 0}) - 0.99989014480565700) < 1e-10);
  }
  SUBCASE("small-h limit recovers the co-jump rate") {
    const double h = 1e-4;
    const auto dist = one_step_distribution_oracle({1, 1}, 1.0, GammaNoiseParams{1.0}, h);
    const double rate = dist.at({1, 1}) / h;
    const double target = 2.0 * std::log(2.0) - std::log(3.0);
    CHECK(std::abs(rate - target) / target < 1e-3);
  }
  SUBCASE("pool cap") {
    CHECK_THROWS_AS(one_step_distribution_oracle({31, 0}, 1.0, GammaNoiseParams{1.0}, 0.1),
                    ConfigError);
  }
}

TEST_CASE("infinitesimal mean estimates") {
  SUBCASE("single member pool") {
    const SystemSpec spec = bivariate_death_system({1, 0, 1.0, 1.0});
    const StateVector init = spec.make_state({{"Y1", 1}});
    const MomentEstimate est = estimate_infinitesimal_mean(
        spec, init, spec.transition_index("Y1", "D"), 0.01, 20000, RngStream{101, 0});
    CHECK(within_3se(est, std::log(2.0)));
    CHECK(est.std_error > 0.0);
    CHECK(est.kind == MomentKind::mean);
  }
  SUBCASE("empty state estimates zero") {
    const SystemSpec spec = bivariate_death_system({0, 0, 1.0, 1.0});
    const StateVector init = spec.make_state({});
    const MomentEstimate est = estimate_infinitesimal_mean(
        spec, init, spec.transition_index("Y1", "D"), 0.01, 2000, RngStream{102, 0});
    CHECK(est.value == 0.0);
    CHECK(est.std_error == 0.0);
  }
  SUBCASE("brute-force marginal target at (2,3)") {
    const SystemSpec spec = bivariate_death_system({2, 3, 1.0, 1.0});
    const StateVector init = spec.make_state({{"Y1", 2}, {"Y2", 3}});
    double target = 0.0;
    for (int k = 1; k <= 2; ++k) {
      target += k * marginal_rate(spec, init, "Y1", "D", k);
    }
    const MomentEstimate est = estimate_infinitesimal_mean(
        spec, init, spec.transition_index("Y1", "D"), 0.005, 50000, RngStream{103, 0});
    CHECK(within_3se(est, target));
  }
}

TEST_CASE("infinitesimal covariance estimates") {
  SUBCASE("bivariate pair matches the closed form") {
    const SystemSpec spec = bivariate_death_system({10, 10, 0.5, 0.5});
    const StateVector init = spec.make_state({{"Y1", 10}, {"Y2", 10}});
    const MomentEstimate est = estimate_infinitesimal_covariance(
        spec, init, spec.transition_index("Y1", "D"), spec.transition_index("Y2", "D"),
        0.01, 40000, RngStream{104, 0});
    const double closed =
        cojump_covariance_closed_form(10, 10, 0.5, GammaNoiseParams{0.5});
    CHECK(within_3se(est, closed));
    CHECK(est.kind == MomentKind::covariance);
  }
  SUBCASE("independent unit families decorrelate") {
    const SystemSpec spec =
        SystemSpec::Builder()
            .compartment("A")
            .compartment("B")
            .unit_family("A", "D", [](const StateVector& x) { return 0.7 * x[0]; })
            .unit_family("B", "D", [](const StateVector& x) { return 0.4 * x[1]; })
            .build();
    const StateVector init = spec.make_state({{"A", 10}, {"B", 10}});
    const MomentEstimate est = estimate_infinitesimal_covariance(
        spec, init, spec.transition_index("A", "D"), spec.transition_index("B", "D"),
        0.005, 40000, RngStream{105, 0});
    CHECK(within_3se(est, 0.0));
  }
}

TEST_CASE("estimator preconditions") {
  const SystemSpec spec = bivariate_death_system({10, 10, 1.0, 1.0});
  const StateVector init = spec.make_state({{"Y1", 10}, {"Y2", 10}});
  const int t = spec.transition_index("Y1", "D");
  CHECK_THROWS_AS(
      estimate_infinitesimal_mean(spec, init, t, 1.0, 20000, RngStream{1, 0}),
      StepTooLarge);
  CHECK_THROWS_AS(
      estimate_infinitesimal_mean(spec, init, t, 0.001, 10, RngStream{1, 0}),
      ConfigError);
}

TEST_CASE("estimates are independent of the worker count") {
  const SystemSpec spec = bivariate_death_system({8, 8, 0.5, 0.5});
  const StateVector init = spec.make_state({{"Y1", 8}, {"Y2", 8}});
  const int t1 = spec.transition_index("Y1", "D");
  const int t2 = spec.transition_index("Y2", "D");
  EstimateOptions single;
  single.threads = 1;
  EstimateOptions quad;
  quad.threads = 4;
  const MomentEstimate a = estimate_infinitesimal_covariance(
      spec, init, t1, t2, 0.01, 10000, RngStream{106, 0}, single);
  const MomentEstimate b = estimate_infinitesimal_covariance(
      spec, init, t1, t2, 0.01, 10000, RngStream{106, 0}, quad);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("bound reports") {
  SUBCASE("bivariate values") {
    const BivariateDeathParams p{1, 1, 1.0, 1.0};
    const SystemSpec spec = bivariate_death_system(p);
    const StateVector init = bivariate_death_initial_state(spec, p);
    const BoundReport r = check_moment_bound(spec, init, p);
    CHECK(r.static_lambda_bound == doctest::Approx(2.0));
    CHECK(r.lambda_at_state == doctest::Approx(std::log(3.0)));
    CHECK(r.static_increment_bound == 2.0);
    CHECK(r.p3_moment_bound == doctest::Approx(8.0));
  }
  SUBCASE("sir default values") {
    const SirParams p = default_sir_params();
    const SystemSpec spec = multistrain_sir_system(p);
    const StateVector init = spec.make_state(default_sir_init());
    const BoundReport r = check_moment_bound(spec, init, p);
    CHECK(r.static_lambda_bound ==
          doctest::Approx((0.02 + 0.5 + 2.0 * 1.51) * 200.0));
    CHECK(r.lambda_at_state <= r.static_lambda_bound);
    CHECK(r.p3_moment_bound ==
          doctest::Approx(200.0 * 200.0 * r.static_lambda_bound));
  }
  SUBCASE("everyone recovered still respects the bound") {
    const SirParams p = default_sir_params();
    const SystemSpec spec = multistrain_sir_system(p);
    const StateVector state = spec.make_state({{"R", 200}});
    const BoundReport r = check_moment_bound(spec, state, p);
    // Only demography is active: deaths at m*P (R-deaths plus replacement).
    const double expected = p.m * static_cast<double>(p.P) +
                            2.0 * std::log1p(p.tau * p.omega * 0.0) / p.tau;
    CHECK(r.lambda_at_state == doctest::Approx(expected));
  }
}

TEST_CASE("report CSV schema") {
  std::vector<EstimateReportRow> rows;
  rows.push_back({"bivariate_death", 0x1234u, "Y1->D+Y2->D", 0.01, 1000, 16.5, 0.5,
                  16.6, -0.2});
  std::ostringstream os;
  write_estimate_report_csv(os, rows);
  const std::string text = os.str();
  CHECK(text.starts_with(
      "model,state_hash,pair,h,replicates,estimate,std_error,closed_form,z_score\n"));
  CHECK(text.find("bivariate_death,0000000000001234,Y1->D+Y2->D,0.01,1000,16.5,0.5,16.6,"
                  "-0.2\n") != std::string::npos);
}

TEST_CASE("state hashes separate different states") {
  const SystemSpec spec = bivariate_death_system({3, 3, 1.0, 1.0});
  const StateVector a = spec.make_state({{"Y1", 3}, {"Y2", 3}});
  const StateVector b = spec.make_state({{"Y1", 3}, {"Y2", 2}});
  CHECK(state_hash(a) != state_hash(b));
  CHECK(state_hash(a) == state_hash(spec.make_state({{"Y1", 3}, {"Y2", 3}})));
}
