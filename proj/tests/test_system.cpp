#include <doctest.h>

#include <cmath>

#include "cojump/errors.hpp"
#include "cojump/models.hpp"
#include "cojump/system.hpp"

using namespace cojump;

namespace {

SystemSpec two_pool_spec(double delta, double tau) {
  return bivariate_death_system(BivariateDeathParams{0, 0, delta, tau});
}

}  // namespace

TEST_CASE("apply_jump moves mass along transitions") {
  const SystemSpec spec = two_pool_spec(1.0, 1.0);
  const StateVector state = spec.make_state({{"Y1", 3}, {"Y2", 2}});

  SUBCASE("single death decrements one compartment") {
    const JumpEvent ev = spec.make_event({{spec.transition_index("Y1", "D"), 1}});
    const StateVector next = apply_jump(spec, state, ev);
    CHECK(next == spec.make_state({{"Y1", 2}, {"Y2", 2}}));
  }
  SUBCASE("co-jump decrements both") {
    const JumpEvent ev = spec.make_event({{spec.transition_index("Y1", "D"), 2},
                                          {spec.transition_index("Y2", "D"), 1}});
    const StateVector next = apply_jump(spec, state, ev);
    CHECK(next == spec.make_state({{"Y1", 1}, {"Y2", 1}}));
  }
  SUBCASE("an empty compartment cannot lose a member") {
    const StateVector empty1 = spec.make_state({{"Y1", 0}, {"Y2", 2}});
    const JumpEvent ev = spec.make_event({{spec.transition_index("Y1", "D"), 1}});
    CHECK_THROWS_AS(apply_jump(spec, empty1, ev), NegativeOccupancy);
  }
}

TEST_CASE("events derive their induced change from the transition endpoints") {
  const SirParams params = default_sir_params();
  const SystemSpec spec = multistrain_sir_system(params);

  SUBCASE("death with replacement moves one individual into S") {
    const JumpEvent ev = spec.make_event({{spec.transition_index("I1", "D"), 1},
                                          {spec.transition_index("B", "S"), 1}});
    const StateVector before = spec.make_state({{"S", 189}, {"I1", 6}, {"I2", 5}});
    const StateVector after = apply_jump(spec, before, ev);
    CHECK(after[kS] == 190);
    CHECK(after[kI1] == 5);
    CHECK(after.total() == before.total());
  }
  SUBCASE("a death from S is a counted no-op on the state") {
    const JumpEvent ev = spec.make_event({{spec.transition_index("S", "D"), 1},
                                          {spec.transition_index("B", "S"), 1}});
    CHECK(ev.induced.empty());
    const StateVector before = spec.make_state(default_sir_init());
    CHECK(apply_jump(spec, before, ev) == before);
  }
}

TEST_CASE("rate_function") {
  SUBCASE("empty system has no events") {
    const SystemSpec spec = two_pool_spec(1.0, 1.0);
    CHECK(rate_function(spec, spec.make_state({})) == 0.0);
  }
  SUBCASE("one member in each pool") {
    const SystemSpec spec = two_pool_spec(1.0, 1.0);
    const StateVector state = spec.make_state({{"Y1", 1}, {"Y2", 1}});
    CHECK(rate_function(spec, state) == doctest::Approx(std::log(3.0)).epsilon(1e-13));
  }
  SUBCASE("the closed SIR rate stays under its static bound") {
    const SirParams p = default_sir_params();
    const SystemSpec spec = multistrain_sir_system(p);
    const StateVector init = spec.make_state(default_sir_init());
    const double bound = (p.m + p.r + 2.0 * (p.beta + p.omega)) * static_cast<double>(p.P);
    CHECK(rate_function(spec, init) <= bound);
  }
  SUBCASE("non-finite family rates are rejected") {
    const SystemSpec spec =
        SystemSpec::Builder()
            .compartment("A")
            .unit_family("A", "D", [](const StateVector&) { return 1.0 / 0.0; })
            .build();
    CHECK_THROWS_AS(rate_function(spec, spec.make_state({{"A", 1}})), RateOverflow);
  }
}

TEST_CASE("marginal_rate") {
  SUBCASE("unit families only jump one at a time") {
    const SystemSpec spec =
        SystemSpec::Builder()
            .compartment("I")
            .compartment("S")
            .unit_family("I", "S", [](const StateVector& x) { return 0.5 * x[0]; })
            .build();
    const StateVector state = spec.make_state({{"I", 4}, {"S", 0}});
    CHECK(marginal_rate(spec, state, "I", "S", 1) == doctest::Approx(2.0));
    CHECK(marginal_rate(spec, state, "I", "S", 2) == 0.0);
  }
  SUBCASE("first co-jump member sums over the partner index") {
    const SystemSpec spec = two_pool_spec(1.0, 1.0);

    const StateVector lone = spec.make_state({{"Y1", 1}, {"Y2", 0}});
    CHECK(marginal_rate(spec, lone, "Y1", "D", 1) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-13));

    const StateVector both = spec.make_state({{"Y1", 2}, {"Y2", 3}});
    double brute = 0.0;
    for (int k2 = 0; k2 <= 3; ++k2) {
      brute += pairwise_cojump_rate(2, 3, 1, k2, 1.0, GammaNoiseParams{1.0});
    }
    CHECK(marginal_rate(spec, both, "Y1", "D", 1) == doctest::Approx(brute).epsilon(1e-12));
    CHECK(marginal_rate(spec, both, "Y1", "D", 3) == 0.0);
  }
  SUBCASE("mean rate identity: sum_k k q(k) = y tau^-1 log1p(delta tau)") {
    const SystemSpec spec = two_pool_spec(0.5, 0.2);
    const StateVector state = spec.make_state({{"Y1", 20}, {"Y2", 20}});
    double mean_rate_sum = 0.0;
    for (int k = 1; k <= 20; ++k) {
      mean_rate_sum += k * marginal_rate(spec, state, "Y1", "D", k);
    }
    CHECK(mean_rate_sum == doctest::Approx(20.0 / 0.2 * std::log1p(0.1)).epsilon(1e-10));
  }
  SUBCASE("unknown transitions are rejected") {
    const SystemSpec spec = two_pool_spec(1.0, 1.0);
    const StateVector state = spec.make_state({{"Y1", 1}, {"Y2", 1}});
    CHECK_THROWS_AS(marginal_rate(spec, state, "Y1", "X", 1), UnknownTransition);
  }
  SUBCASE("plain unit systems: rate function equals the summed marginals") {
    const SystemSpec spec =
        SystemSpec::Builder()
            .compartment("A")
            .compartment("B")
            .unit_family("A", "B", [](const StateVector& x) { return 0.3 * x[0]; })
            .unit_family("B", "D", [](const StateVector& x) { return 1.1 * x[1]; })
            .build();
    const StateVector state = spec.make_state({{"A", 7}, {"B", 4}});
    double summed = 0.0;
    for (std::size_t t = 0; t < spec.transition_count(); ++t) {
      summed += marginal_rate(spec, state, static_cast<int>(t), 1);
    }
    CHECK(summed == doctest::Approx(rate_function(spec, state)).epsilon(1e-10));
  }
  SUBCASE("co-jump systems: unit rates plus pairwise sums") {
    const SystemSpec spec = two_pool_spec(0.7, 0.3);
    const StateVector state = spec.make_state({{"Y1", 6}, {"Y2", 5}});
    double pairwise_total = 0.0;
    for (int k1 = 0; k1 <= 6; ++k1) {
      for (int k2 = 0; k2 <= 5; ++k2) {
        if (k1 == 0 && k2 == 0) continue;
        pairwise_total += pairwise_cojump_rate(6, 5, k1, k2, 0.7, GammaNoiseParams{0.3});
      }
    }
    CHECK(pairwise_total == doctest::Approx(rate_function(spec, state)).epsilon(1e-10));
  }
}

TEST_CASE("spec validation") {
  SUBCASE("at least one compartment") {
    CHECK_THROWS_AS(SystemSpec::Builder().build(), ConfigError);
  }
  SUBCASE("duplicate labels") {
    CHECK_THROWS_AS(SystemSpec::Builder().compartment("A").compartment("A"),
                    ConfigError);
  }
  SUBCASE("self transitions") {
    SystemSpec::Builder b;
    b.compartment("A");
    CHECK_THROWS_AS(b.transition("A", "A"), ConfigError);
  }
  SUBCASE("a transition cannot be driven twice") {
    SystemSpec::Builder b;
    b.compartment("A");
    b.unit_family("A", "D", [](const StateVector&) { return 1.0; });
    b.unit_family("A", "D", [](const StateVector&) { return 2.0; });
    CHECK_THROWS_AS(b.build(), ConfigError);
  }
  SUBCASE("co-jump members must drain distinct real compartments") {
    SystemSpec::Builder b;
    b.compartment("A");
    b.cojump_family("A", "D", "A", "E", [](const StateVector&) { return 1.0; },
                    GammaNoiseParams{1.0});
    CHECK_THROWS_AS(b.build(), ConfigError);
  }
  SUBCASE("boundary-only transitions are rejected") {
    SystemSpec::Builder b;
    b.compartment("A");
    b.transition("B", "D");
    CHECK_THROWS_AS(b.build(), ConfigError);
  }
}

TEST_CASE("make_event validates increments") {
  const SystemSpec spec = two_pool_spec(1.0, 1.0);
  CHECK_THROWS_AS(spec.make_event({}), InvalidJumpSize);
  CHECK_THROWS_AS(spec.make_event({{0, 0}}), InvalidJumpSize);
  CHECK_THROWS_AS(spec.make_event({{99, 1}}), UnknownTransition);
}
