#ifndef COJUMP_SYSTEM_HPP
#define COJUMP_SYSTEM_HPP

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cojump/rates.hpp"

namespace cojump {

using Count = std::int64_t;

/// Occupancy of every compartment, densely indexed in the order fixed by the
/// owning SystemSpec at construction time.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::vector<Count> counts) : counts_(std::move(counts)) {}

  Count operator[](std::size_t i) const { return counts_[i]; }
  Count& operator[](std::size_t i) { return counts_[i]; }
  std::size_t size() const { return counts_.size(); }
  Count total() const;

  const std::vector<Count>& counts() const { return counts_; }
  bool operator==(const StateVector&) const = default;

 private:
  std::vector<Count> counts_;
};

/// Cumulative transition counts, densely indexed in the SystemSpec's
/// transition order. Entrywise nondecreasing along any trajectory.
class CountVector {
 public:
  CountVector() = default;
  explicit CountVector(std::size_t transitions) : counts_(transitions, 0) {}

  Count operator[](std::size_t i) const { return counts_[i]; }
  Count& operator[](std::size_t i) { return counts_[i]; }
  std::size_t size() const { return counts_.size(); }

  const std::vector<Count>& counts() const { return counts_; }
  bool operator==(const CountVector&) const = default;

 private:
  std::vector<Count> counts_;
};

/// A directed transition between stages. Endpoints that are not declared
/// compartments (the birth source and death sink) are legal; they simply
/// carry no occupancy, so the transition only moves mass at its real end.
struct Transition {
  std::string from;
  std::string to;

  std::string label() const { return from + "->" + to; }
  bool operator==(const Transition&) const = default;
};

/// One atomic jump: positive increments of one or more counting processes
/// plus the induced state change they force through mass conservation.
struct JumpEvent {
  /// (transition index, increment), increments strictly positive, indices
  /// strictly increasing.
  std::vector<std::pair<int, Count>> increments;
  /// (compartment index, net change), indices strictly increasing, zero
  /// entries omitted. Always derivable from `increments`; stored so that
  /// applying an event is a flat loop.
  std::vector<std::pair<int, Count>> induced;
};

/// State-dependent rate, evaluated fresh at every event.
using RateFn = std::function<double(const StateVector&)>;

/// A single-transition event family: the primary counting process increments
/// by one at the given rate. An optional companion process increments in the
/// same event (used for death-with-replacement, where the death counter and
/// the birth counter move together).
struct UnitFamily {
  int transition = -1;
  int companion = -1;
  RateFn rate;
};

/// Two transitions driven by one shared gamma white noise on a common
/// per-capita rate. Produces simultaneous jumps of sizes (k1, k2) with the
/// closed-form pairwise rates.
struct CoJumpFamily {
  int first = -1;
  int second = -1;
  int source_first = -1;   // compartment drained by `first`
  int source_second = -1;  // compartment drained by `second`
  RateFn per_capita_rate;  // the same rate applies to both members
  GammaNoiseParams noise;
};

/// A Markov counting system: compartments, allowed transitions, and the rate
/// families that generate events. Immutable once built; all operations are
/// pure functions of (spec, state).
class SystemSpec {
 public:
  class Builder;

  std::size_t compartment_count() const { return compartments_.size(); }
  std::size_t transition_count() const { return transitions_.size(); }

  const std::vector<std::string>& compartments() const { return compartments_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<UnitFamily>& unit_families() const { return unit_families_; }
  const std::vector<CoJumpFamily>& cojump_families() const { return cojump_families_; }

  /// Index of a compartment label, or -1 if it is not a declared compartment.
  int compartment_index(std::string_view label) const;
  /// Index of a transition, or -1.
  int transition_index(std::string_view from, std::string_view to) const;
  /// Index of a transition by its "from->to" label; throws UnknownTransition.
  int require_transition(std::string_view label) const;

  /// Builds a state from per-label counts; unknown labels or missing
  /// compartments are errors.
  StateVector make_state(const std::map<std::string, Count>& counts) const;

  /// Builds a validated JumpEvent from raw increments, deriving the induced
  /// state change from the transition endpoints.
  JumpEvent make_event(std::vector<std::pair<int, Count>> increments) const;

  /// Expected total population at every reachable state, if the system is
  /// closed (otherwise < 0).
  Count fixed_population() const { return fixed_population_; }

 private:
  std::vector<std::string> compartments_;
  std::vector<Transition> transitions_;
  std::vector<UnitFamily> unit_families_;
  std::vector<CoJumpFamily> cojump_families_;
  std::map<std::string, int, std::less<>> compartment_lookup_;
  std::map<std::pair<std::string, std::string>, int> transition_lookup_;
  Count fixed_population_ = -1;
};

class SystemSpec::Builder {
 public:
  Builder& compartment(std::string label);
  Builder& transition(std::string from, std::string to);
  Builder& unit_family(const std::string& from, const std::string& to, RateFn rate);
  /// Unit family whose events also increment a companion counting process
  /// (e.g. a replacement birth recorded alongside each death).
  Builder& unit_family_with_companion(const std::string& from, const std::string& to,
                                      const std::string& companion_from,
                                      const std::string& companion_to, RateFn rate);
  Builder& cojump_family(const std::string& first_from, const std::string& first_to,
                         const std::string& second_from, const std::string& second_to,
                         RateFn per_capita_rate, GammaNoiseParams noise);
  /// Declares the system closed with the given constant total population.
  Builder& fixed_population(Count total);

  SystemSpec build();

 private:
  int ensure_transition(const std::string& from, const std::string& to);

  SystemSpec spec_;
};

/// Applies one jump to a state, returning the new state. Throws
/// NegativeOccupancy if any compartment would go negative.
StateVector apply_jump(const SystemSpec& spec, const StateVector& state,
                       const JumpEvent& event);

/// Total event rate of the system at a state: the sum of all unit-family
/// rates plus each co-jump family's closed-form total. Throws RateOverflow
/// if any family evaluates non-finite or negative.
double rate_function(const SystemSpec& spec, const StateVector& state);

/// Rate at which exactly k members undergo the given transition
/// simultaneously, irrespective of other transitions. For a co-jump member
/// this sums the pairwise rates over the partner size; for unit transitions
/// it is the family rate at k == 1 and zero otherwise.
double marginal_rate(const SystemSpec& spec, const StateVector& state,
                     int transition, Count k);
double marginal_rate(const SystemSpec& spec, const StateVector& state,
                     std::string_view from, std::string_view to, Count k);

}  // namespace cojump

#endif  // COJUMP_SYSTEM_HPP
