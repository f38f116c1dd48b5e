#include "cojump/models.hpp"

#include <cmath>
#include <string>

#include "cojump/errors.hpp"

namespace cojump {

namespace {

void check_bivariate(const BivariateDeathParams& p) {
  if (p.y1_0 < 0 || p.y2_0 < 0) throw ConfigError("initial populations must be nonnegative");
  if (!(p.delta > 0.0) || !std::isfinite(p.delta)) {
    throw ConfigError("delta must be finite and positive");
  }
  if (!(p.tau > 0.0) || !std::isfinite(p.tau)) {
    throw ConfigError("tau must be finite and positive");
  }
}

void check_sir(const SirParams& p) {
  if (p.P < 1) throw ConfigError("population P must be positive");
  if (!(p.beta >= 0.0) || !(p.omega >= 0.0) || !(p.m >= 0.0) || !(p.r >= 0.0)) {
    throw ConfigError("rates beta, omega, m, r must be nonnegative");
  }
  if (!(p.alpha >= 0.0) || !(p.alpha <= 1.0)) {
    throw ConfigError("mixing exponent alpha must lie in [0,1]");
  }
  if (p.gamma != 0.0) {
    throw UnsupportedGamma("cross-immunity gamma must be 0 when rates carry noise");
  }
  if (!(p.tau > 0.0) || !std::isfinite(p.tau)) {
    throw ConfigError("tau must be finite and positive");
  }
}

}  // namespace

SystemSpec bivariate_death_system(const BivariateDeathParams& params) {
  check_bivariate(params);
  const double delta = params.delta;
  return SystemSpec::Builder()
      .compartment("Y1")
      .compartment("Y2")
      .cojump_family("Y1", "D", "Y2", "D",
                     [delta](const StateVector&) { return delta; },
                     GammaNoiseParams{params.tau})
      .build();
}

StateVector bivariate_death_initial_state(const SystemSpec& spec,
                                          const BivariateDeathParams& params) {
  return spec.make_state({{"Y1", params.y1_0}, {"Y2", params.y2_0}});
}

double strain_force_of_infection(const StateVector& state, const SirParams& params,
                                 int strain) {
  if (strain != 1 && strain != 2) throw ConfigError("strain must be 1 or 2");
  const Count infectives = (strain == 1) ? state[kI1] + state[kI1star]
                                         : state[kI2] + state[kI2star];
  // std::pow(0,0) == 1 implements the alpha == 0 convention documented in
  // the header; for alpha > 0 the factor is 0 when nobody is infective.
  const double mixing = std::pow(static_cast<double>(infectives), params.alpha);
  return params.beta * mixing / static_cast<double>(params.P) + params.omega;
}

SystemSpec multistrain_sir_system(const SirParams& params) {
  check_sir(params);
  const SirParams p = params;

  SystemSpec::Builder b;
  const std::string labels[] = {"S", "I1", "I2", "S1", "S2", "I1*", "I2*", "R"};
  for (const std::string& c : labels) b.compartment(c);

  // Recovery.
  b.unit_family("I1", "S1", [r = p.r](const StateVector& x) { return r * x[kI1]; });
  b.unit_family("I2", "S2", [r = p.r](const StateVector& x) { return r * x[kI2]; });
  b.unit_family("I1*", "R", [r = p.r](const StateVector& x) { return r * x[kI1star]; });
  b.unit_family("I2*", "R", [r = p.r](const StateVector& x) { return r * x[kI2star]; });

  // Death with replacement: each death increments its own counter and the
  // birth counter, and moves one individual back into S. A death from S is a
  // counted self-loop that leaves the state unchanged.
  const int comp_count = 8;
  for (int c = 0; c < comp_count; ++c) {
    const std::string from = labels[c];
    b.unit_family_with_companion(from, "D", "B", "S",
                                 [m = p.m, c](const StateVector& x) {
                                   return m * static_cast<double>(x[static_cast<std::size_t>(c)]);
                                 });
  }

  // One shared noise per strain on the pair of infection routes.
  b.cojump_family("S", "I1", "S1", "I1*",
                  [p](const StateVector& x) { return strain_force_of_infection(x, p, 1); },
                  GammaNoiseParams{p.tau});
  b.cojump_family("S", "I2", "S2", "I2*",
                  [p](const StateVector& x) { return strain_force_of_infection(x, p, 2); },
                  GammaNoiseParams{p.tau});

  b.fixed_population(p.P);
  return b.build();
}

SirParams default_sir_params() { return SirParams{}; }

std::map<std::string, Count> default_sir_init() {
  return {{"S", 190}, {"I1", 5}, {"I2", 5}};
}

}  // namespace cojump
