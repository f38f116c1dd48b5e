#ifndef COJUMP_MODELS_HPP
#define COJUMP_MODELS_HPP

#include <map>
#include <string>

#include "cojump/system.hpp"

namespace cojump {

/// Two pools with a common per-capita death rate subjected to one shared
/// gamma white noise.
struct BivariateDeathParams {
  Count y1_0 = 0;      // initial occupancy of Y1
  Count y2_0 = 0;      // initial occupancy of Y2
  double delta = 1.0;  // per-capita death rate, 1/time
  double tau = 1.0;    // noise magnitude
};

/// Closed two-strain SIR system with demographic replacement. Cross-immunity
/// is fixed to zero, which is what makes the within-strain infection rates a
/// common-rate noisy pair.
struct SirParams {
  Count P = 200;        // fixed total population
  double beta = 1.5;    // transmission rate, 1/time
  double omega = 0.01;  // environmental reservoir rate, 1/time
  double alpha = 1.0;   // mixing exponent in [0,1]
  double m = 0.02;      // mortality (with replacement), 1/time
  double r = 0.5;       // recovery rate, 1/time
  double gamma = 0.0;   // cross-immunity; must be 0
  double tau = 0.2;     // noise magnitude
};

/// Canonical SIR compartment order used by every SIR StateVector.
enum SirCompartment : int {
  kS = 0,
  kI1 = 1,
  kI2 = 2,
  kS1 = 3,
  kS2 = 4,
  kI1star = 5,
  kI2star = 6,
  kR = 7,
};

/// Compartments {Y1, Y2}; one co-jump family over (Y1->D, Y2->D) with
/// constant per-capita rate delta; no unit families.
SystemSpec bivariate_death_system(const BivariateDeathParams& params);

StateVector bivariate_death_initial_state(const SystemSpec& spec,
                                          const BivariateDeathParams& params);

/// Per-susceptible infection rate of a strain:
///   beta * (I_i + I_i*)^alpha / P + omega.
/// With alpha == 0 and no infectives the mixing factor 0^0 is taken as 1, so
/// the rate is beta/P + omega.
double strain_force_of_infection(const StateVector& state, const SirParams& params,
                                 int strain);

/// Compartments {S, I1, I2, S1, S2, I1*, I2*, R}; unit families for recovery
/// and for death-with-replacement (each death event also increments the
/// birth counter B->S and returns one individual to S); one co-jump family
/// per strain pairing (S->I_i, S_i->I_i*) with state-dependent per-capita
/// rate strain_force_of_infection. The two strain noises are independent:
/// there are no co-jumps across strains. Throws UnsupportedGamma if
/// params.gamma != 0.
SystemSpec multistrain_sir_system(const SirParams& params);

/// Desk-scale defaults used by the verification suites: P=200, S=190,
/// I1=I2=5, everything else empty.
SirParams default_sir_params();
std::map<std::string, Count> default_sir_init();

}  // namespace cojump

#endif  // COJUMP_MODELS_HPP
