#include <doctest.h>

#include <cmath>

#include "cojump/config.hpp"
#include "cojump/errors.hpp"
#include "cojump/models.hpp"

using namespace cojump;

TEST_CASE("bivariate death system structure") {
  const BivariateDeathParams params{1, 1, 1.0, 1.0};
  const SystemSpec spec = bivariate_death_system(params);
  CHECK(spec.compartment_count() == 2);
  CHECK(spec.transition_count() == 2);
  CHECK(spec.unit_families().empty());
  CHECK(spec.cojump_families().size() == 1);

  const StateVector init = bivariate_death_initial_state(spec, params);
  CHECK(rate_function(spec, init) == doctest::Approx(std::log(3.0)).epsilon(1e-13));
}

TEST_CASE("strain force of infection") {
  SirParams p = default_sir_params();
  const SystemSpec spec = multistrain_sir_system(p);

  SUBCASE("no infectives, no reservoir") {
    SirParams q = p;
    q.omega = 0.0;
    const StateVector state = spec.make_state({{"S", 200}});
    CHECK(strain_force_of_infection(state, q, 1) == 0.0);
    CHECK(strain_force_of_infection(state, q, 2) == 0.0);
  }
  SUBCASE("fully infected, homogeneous mixing") {
    SirParams q = p;
    q.omega = 0.0;
    q.alpha = 1.0;
    const StateVector state = spec.make_state({{"I1", 120}, {"I1*", 80}});
    CHECK(strain_force_of_infection(state, q, 1) == doctest::Approx(q.beta));
  }
  SUBCASE("square-root mixing with a reservoir") {
    SirParams q = p;
    q.beta = 2.0;
    q.omega = 0.01;
    q.alpha = 0.5;
    q.P = 100;
    const StateVector state = spec.make_state({{"S", 96}, {"I1", 3}, {"I1*", 1}});
    CHECK(strain_force_of_infection(state, q, 1) == doctest::Approx(0.05).epsilon(1e-12));
  }
  SUBCASE("alpha == 0 with no infectives uses 0^0 == 1") {
    SirParams q = p;
    q.alpha = 0.0;
    const StateVector state = spec.make_state({{"S", 200}});
    CHECK(strain_force_of_infection(state, q, 1) ==
          doctest::Approx(q.beta / static_cast<double>(q.P) + q.omega));
  }
}

TEST_CASE("multistrain SIR structure") {
  const SirParams p = default_sir_params();
  const SystemSpec spec = multistrain_sir_system(p);

  CHECK(spec.compartment_count() == 8);
  CHECK(spec.cojump_families().size() == 2);
  // 4 recovery + 8 death-with-replacement unit families.
  CHECK(spec.unit_families().size() == 12);
  CHECK(spec.fixed_population() == p.P);

  SUBCASE("cross immunity is rejected") {
    SirParams q = p;
    q.gamma = 0.3;
    CHECK_THROWS_AS(multistrain_sir_system(q), UnsupportedGamma);
  }

  SUBCASE("all susceptible with no reservoir leaves only demography") {
    SirParams q = p;
    q.omega = 0.0;
    const SystemSpec s = multistrain_sir_system(q);
    const StateVector state = s.make_state({{"S", 200}});
    // Infection and recovery rates vanish; S-deaths self-replace at m*P.
    CHECK(rate_function(s, state) ==
          doctest::Approx(q.m * static_cast<double>(q.P)).epsilon(1e-12));
  }

  SUBCASE("each strain family total matches its closed form") {
    const StateVector init = spec.make_state(default_sir_init());
    const double lambda1 = strain_force_of_infection(init, p, 1);
    const double pool = static_cast<double>(init[kS] + init[kS1]);
    const double expected = std::log1p(p.tau * lambda1 * pool) / p.tau;
    // Reference value computed at 60-digit precision for the default init.
    CHECK(expected == doctest::Approx(5.1570176948732982).epsilon(1e-13));
    double unit_rates = 0.0;
    for (const UnitFamily& f : spec.unit_families()) unit_rates += f.rate(init);
    const double lambda2 = strain_force_of_infection(init, p, 2);
    const double expected2 = std::log1p(p.tau * lambda2 * pool) / p.tau;
    CHECK(rate_function(spec, init) ==
          doctest::Approx(unit_rates + expected + expected2).epsilon(1e-12));
  }

  SUBCASE("strain covariance identity at a mixed state") {
    const StateVector state = spec.make_state(
        {{"S", 150}, {"I1", 8}, {"I2", 4}, {"S1", 20}, {"S2", 10}, {"I1*", 3},
         {"I2*", 2}, {"R", 3}});
    const double lambda1 = strain_force_of_infection(state, p, 1);
    const PairwiseRateTable table = PairwiseRateTable::build(
        static_cast<int>(state[kS]), static_cast<int>(state[kS1]), lambda1,
        GammaNoiseParams{p.tau});
    const double closed = cojump_covariance_closed_form(
        static_cast<int>(state[kS]), static_cast<int>(state[kS1]), lambda1,
        GammaNoiseParams{p.tau});
    CHECK(std::abs(covariance_by_summation(table) - closed) <= 1e-8 * closed);
  }
}

TEST_CASE("run config parsing") {
  const std::string good = R"(# two pools
[model]
name = bivariate_death

[params]
delta = 0.5

[noise]
tau = 0.2

[init]
Y1 = 20
Y2 = 20

[run]
seed = 42
t_end = 5.0
replicates = 3
)";

  SUBCASE("round trip") {
    const RunConfig cfg = parse_run_config(good);
    CHECK(cfg.model == ModelKind::bivariate_death);
    CHECK(cfg.bivariate.delta == 0.5);
    CHECK(cfg.bivariate.tau == 0.2);
    CHECK(cfg.bivariate.y1_0 == 20);
    CHECK(cfg.bivariate.y2_0 == 20);
    CHECK(cfg.seed == 42);
    CHECK(cfg.t_end == 5.0);
    CHECK(cfg.replicates == 3);
    const SystemSpec spec = build_system(cfg);
    const StateVector init = initial_state(cfg, spec);
    CHECK(init.total() == 40);
  }
  SUBCASE("unknown keys are errors") {
    CHECK_THROWS_AS(parse_run_config(good + "\n[params]\n"), ConfigError);
    std::string bad = good;
    bad.replace(bad.find("delta"), 5, "delol");
    CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
    CHECK_THROWS_AS(parse_run_config(good + "\n[extra]\nx = 1\n"), ConfigError);
  }
  SUBCASE("missing model is an error") {
    CHECK_THROWS_AS(parse_run_config("[params]\ndelta = 1\n"), ConfigError);
  }
  SUBCASE("negative occupancy is an error") {
    std::string bad = good;
    bad.replace(bad.find("Y1 = 20"), 7, "Y1 = -2");
    CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
  }
}

TEST_CASE("sir config with explicit population") {
  const std::string text = R"(
[model]
name = multistrain_sir

[params]
beta = 1.5
omega = 0.01
alpha = 1.0
m = 0.02
r = 0.5
gamma = 0.0
P = 200

[noise]
tau = 0.2

[init]
S = 190
I1 = 5
I2 = 5

[run]
seed = 7
)";
  const RunConfig cfg = parse_run_config(text);
  CHECK(cfg.model == ModelKind::multistrain_sir);
  CHECK(cfg.sir.P == 200);
  const SystemSpec spec = build_system(cfg);
  CHECK(initial_state(cfg, spec).total() == 200);

  std::string bad = text;
  bad.replace(bad.find("P = 200"), 7, "P = 201");
  CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
}
