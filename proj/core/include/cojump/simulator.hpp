#ifndef COJUMP_SIMULATOR_HPP
#define COJUMP_SIMULATOR_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cojump/rng.hpp"
#include "cojump/system.hpp"

namespace cojump {

/// A realized path: times[0] = 0 holds the initial state; event k moves
/// states[k] to states[k+1] at times[k+1].
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<CountVector> counts;
  std::vector<JumpEvent> events;
};

struct NextEvent {
  double waiting_time = 0.0;
  JumpEvent event;
};

struct SimulateOptions {
  std::uint64_t event_budget = 10'000'000;
};

/// One step of the embedded jump chain: exponential waiting time at the
/// current rate function, then an event drawn with probability rate/total.
/// Returns nullopt when the state is absorbing (zero total rate). Co-jump
/// sizes are drawn from the eagerly enumerated pairwise table, which is
/// memoized per thread keyed on (y1, y2, quantized rate, tau).
std::optional<NextEvent> next_event(const SystemSpec& spec, const StateVector& state,
                                    Rng& rng);

/// Simulates until t_end or absorption; throws EventBudgetExceeded beyond
/// options.event_budget events.
Trajectory simulate(const SystemSpec& spec, const StateVector& init, double t_end,
                    RngStream rng, SimulateOptions options = {});

/// Final state and counts only; the fast path for replicated short windows.
struct WindowResult {
  StateVector state;
  CountVector counts;
  std::uint64_t events = 0;
};
WindowResult run_window(const SystemSpec& spec, const StateVector& init, double h,
                        Rng& rng, std::uint64_t event_budget = 10'000'000);

/// One step of the random-environment construction itself: the pair of death
/// counts over [0, h] obtained by running both pools through a common gamma
/// time increment g ~ Gamma(h/tau, tau), under which the death counts are
/// independent Binomial(y_i, 1 - exp(-delta*g)). This is the oracle the
/// closed-form co-jump rates must reproduce.
std::pair<Count, Count> simulate_subordinated_bivariate_death(
    std::pair<Count, Count> y0, double delta, GammaNoiseParams noise, double h,
    Rng& rng);

/// (event_type, k1, k2) triple describing an event for reports: co-jump
/// events print both member labels joined by '+', unit events print the
/// primary transition and sizes (1, 0).
struct EventDescription {
  std::string type;
  Count k1 = 0;
  Count k2 = 0;
};
EventDescription describe_event(const SystemSpec& spec, const JumpEvent& event);

/// Columns: time, event_type, k1, k2, then one column per compartment.
/// Times are fixed-point with 9 decimals; the first data row holds the
/// initial state with event_type "init".
void write_trajectory_csv(std::ostream& os, const SystemSpec& spec,
                          const Trajectory& trajectory);

/// Re-checks every trajectory invariant: strictly increasing times, states
/// reproduced by re-applying each event, nondecreasing counts matching the
/// event increments, the integer mass-conservation identity against the
/// initial state, and the fixed population total when the system is closed.
/// Throws Error with a description on the first violation.
void validate_trajectory(const SystemSpec& spec, const Trajectory& trajectory);

namespace detail {
/// Pairwise table lookup with the per-thread memo; exposed for tests.
std::shared_ptr<const PairwiseRateTable> cached_pairwise_table(int y1, int y2,
                                                               double delta,
                                                               double tau);
}  // namespace detail

}  // namespace cojump

#endif  // COJUMP_SIMULATOR_HPP
