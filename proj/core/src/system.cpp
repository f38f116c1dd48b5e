#include "cojump/system.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "cojump/errors.hpp"

namespace cojump {

Count StateVector::total() const {
  Count t = 0;
  for (const Count c : counts_) t += c;
  return t;
}

int SystemSpec::compartment_index(std::string_view label) const {
  const auto it = compartment_lookup_.find(label);
  return it == compartment_lookup_.end() ? -1 : it->second;
}

int SystemSpec::transition_index(std::string_view from, std::string_view to) const {
  const auto it = transition_lookup_.find({std::string(from), std::string(to)});
  return it == transition_lookup_.end() ? -1 : it->second;
}

int SystemSpec::require_transition(std::string_view label) const {
  const auto arrow = label.find("->");
  if (arrow != std::string_view::npos) {
    const int idx = transition_index(label.substr(0, arrow), label.substr(arrow + 2));
    if (idx >= 0) return idx;
  }
  throw UnknownTransition("unknown transition '" + std::string(label) + "'");
}

StateVector SystemSpec::make_state(const std::map<std::string, Count>& counts) const {
  std::vector<Count> v(compartments_.size(), 0);
  for (const auto& [label, count] : counts) {
    const int idx = compartment_index(label);
    if (idx < 0) throw ConfigError("unknown compartment '" + label + "'");
    if (count < 0) throw ConfigError("negative occupancy for '" + label + "'");
    v[static_cast<std::size_t>(idx)] = count;
  }
  return StateVector(std::move(v));
}

JumpEvent SystemSpec::make_event(std::vector<std::pair<int, Count>> increments) const {
  std::sort(increments.begin(), increments.end());
  JumpEvent ev;
  std::vector<Count> change(compartments_.size(), 0);
  for (const auto& [t, k] : increments) {
    if (t < 0 || static_cast<std::size_t>(t) >= transitions_.size()) {
      throw UnknownTransition("transition index out of range");
    }
    if (k <= 0) throw InvalidJumpSize("increments must be strictly positive");
    const Transition& tr = transitions_[static_cast<std::size_t>(t)];
    if (const int from = compartment_index(tr.from); from >= 0) {
      change[static_cast<std::size_t>(from)] -= k;
    }
    if (const int to = compartment_index(tr.to); to >= 0) {
      change[static_cast<std::size_t>(to)] += k;
    }
  }
  if (increments.empty()) throw InvalidJumpSize("a jump must increment some count");
  ev.increments = std::move(increments);
  for (std::size_t c = 0; c < change.size(); ++c) {
    if (change[c] != 0) ev.induced.emplace_back(static_cast<int>(c), change[c]);
  }
  return ev;
}

SystemSpec::Builder& SystemSpec::Builder::compartment(std::string label) {
  if (label.empty()) throw ConfigError("compartment label must be nonempty");
  if (spec_.compartment_lookup_.contains(label)) {
    throw ConfigError("duplicate compartment '" + label + "'");
  }
  spec_.compartment_lookup_.emplace(label, static_cast<int>(spec_.compartments_.size()));
  spec_.compartments_.push_back(std::move(label));
  return *this;
}

int SystemSpec::Builder::ensure_transition(const std::string& from, const std::string& to) {
  if (from == to) throw ConfigError("self-transition '" + from + "' is not allowed");
  const auto key = std::make_pair(from, to);
  if (const auto it = spec_.transition_lookup_.find(key);
      it != spec_.transition_lookup_.end()) {
    return it->second;
  }
  const int idx = static_cast<int>(spec_.transitions_.size());
  spec_.transition_lookup_.emplace(key, idx);
  spec_.transitions_.push_back({from, to});
  return idx;
}

SystemSpec::Builder& SystemSpec::Builder::transition(std::string from, std::string to) {
  ensure_transition(from, to);
  return *this;
}

SystemSpec::Builder& SystemSpec::Builder::unit_family(const std::string& from,
                                                      const std::string& to, RateFn rate) {
  UnitFamily f;
  f.transition = ensure_transition(from, to);
  f.rate = std::move(rate);
  spec_.unit_families_.push_back(std::move(f));
  return *this;
}

SystemSpec::Builder& SystemSpec::Builder::unit_family_with_companion(
    const std::string& from, const std::string& to, const std::string& companion_from,
    const std::string& companion_to, RateFn rate) {
  UnitFamily f;
  f.transition = ensure_transition(from, to);
  f.companion = ensure_transition(companion_from, companion_to);
  f.rate = std::move(rate);
  spec_.unit_families_.push_back(std::move(f));
  return *this;
}

SystemSpec::Builder& SystemSpec::Builder::cojump_family(
    const std::string& first_from, const std::string& first_to,
    const std::string& second_from, const std::string& second_to, RateFn per_capita_rate,
    GammaNoiseParams noise) {
  CoJumpFamily f;
  f.first = ensure_transition(first_from, first_to);
  f.second = ensure_transition(second_from, second_to);
  f.source_first = spec_.compartment_index(first_from);
  f.source_second = spec_.compartment_index(second_from);
  f.per_capita_rate = std::move(per_capita_rate);
  f.noise = noise;
  spec_.cojump_families_.push_back(std::move(f));
  return *this;
}

SystemSpec::Builder& SystemSpec::Builder::fixed_population(Count total) {
  spec_.fixed_population_ = total;
  return *this;
}

SystemSpec SystemSpec::Builder::build() {
  if (spec_.compartments_.empty()) {
    throw ConfigError("a system needs at least one compartment");
  }
  // Every transition must touch at least one real compartment.
  for (const Transition& t : spec_.transitions_) {
    if (spec_.compartment_index(t.from) < 0 && spec_.compartment_index(t.to) < 0) {
      throw ConfigError("transition " + t.label() + " touches no compartment");
    }
  }
  // A transition may generate events through at most one family.
  std::set<int> primaries;
  const auto claim = [&](int t, const char* role) {
    if (!primaries.insert(t).second) {
      throw ConfigError(std::string("transition is driven by more than one family (") +
                        role + ")");
    }
  };
  for (const UnitFamily& f : spec_.unit_families_) {
    if (!f.rate) throw ConfigError("unit family missing a rate function");
    claim(f.transition, "unit");
  }
  for (const CoJumpFamily& f : spec_.cojump_families_) {
    if (!f.per_capita_rate) throw ConfigError("co-jump family missing a rate function");
    if (f.first == f.second) {
      throw ConfigError("a co-jump family needs two distinct transitions");
    }
    if (f.source_first < 0 || f.source_second < 0) {
      throw ConfigError("co-jump members must drain declared compartments");
    }
    if (f.source_first == f.source_second) {
      throw ConfigError("co-jump members must drain distinct compartments");
    }
    if (!(f.noise.tau > 0.0) || !std::isfinite(f.noise.tau)) {
      throw ConfigError("noise magnitude tau must be finite and positive");
    }
    claim(f.first, "co-jump");
    claim(f.second, "co-jump");
  }
  return std::move(spec_);
}

StateVector apply_jump(const SystemSpec& spec, const StateVector& state,
                       const JumpEvent& event) {
  StateVector next = state;
  for (const auto& [c, delta] : event.induced) {
    const Count updated = next[static_cast<std::size_t>(c)] + delta;
    if (updated < 0) {
      throw NegativeOccupancy("jump drives compartment '" +
                              spec.compartments()[static_cast<std::size_t>(c)] +
                              "' below zero");
    }
    next[static_cast<std::size_t>(c)] = updated;
  }
  return next;
}

namespace {

double checked_rate(double r, const char* what) {
  if (!std::isfinite(r) || r < 0.0) {
    throw RateOverflow(std::string(what) + " evaluated to a non-finite or negative value");
  }
  return r;
}

}  // namespace

double rate_function(const SystemSpec& spec, const StateVector& state) {
  double lambda = 0.0;
  for (const UnitFamily& f : spec.unit_families()) {
    lambda += checked_rate(f.rate(state), "unit family rate");
  }
  for (const CoJumpFamily& f : spec.cojump_families()) {
    const double delta = checked_rate(f.per_capita_rate(state), "co-jump per-capita rate");
    const Count pool = state[static_cast<std::size_t>(f.source_first)] +
                       state[static_cast<std::size_t>(f.source_second)];
    lambda += std::log1p(delta * f.noise.tau * static_cast<double>(pool)) / f.noise.tau;
  }
  if (!std::isfinite(lambda)) throw RateOverflow("rate function is not finite");
  return lambda;
}

double marginal_rate(const SystemSpec& spec, const StateVector& state, int transition,
                     Count k) {
  if (transition < 0 || static_cast<std::size_t>(transition) >= spec.transition_count()) {
    throw UnknownTransition("transition index out of range");
  }
  if (k < 1) throw InvalidJumpSize("marginal rate requires k >= 1");

  for (const CoJumpFamily& f : spec.cojump_families()) {
    if (f.first != transition && f.second != transition) continue;
    const bool as_first = (f.first == transition);
    const int y_own = static_cast<int>(
        state[static_cast<std::size_t>(as_first ? f.source_first : f.source_second)]);
    const int y_other = static_cast<int>(
        state[static_cast<std::size_t>(as_first ? f.source_second : f.source_first)]);
    if (k > y_own) return 0.0;
    const double delta = f.per_capita_rate(state);
    detail::CompensatedSum sum;
    for (int partner = 0; partner <= y_other; ++partner) {
      const int k1 = as_first ? static_cast<int>(k) : partner;
      const int k2 = as_first ? partner : static_cast<int>(k);
      const int yy1 = as_first ? y_own : y_other;
      const int yy2 = as_first ? y_other : y_own;
      sum.add(pairwise_cojump_rate(yy1, yy2, k1, k2, delta, f.noise));
    }
    return sum.value();
  }

  // Unit events all have size one.
  if (k != 1) return 0.0;
  double rate = 0.0;
  for (const UnitFamily& f : spec.unit_families()) {
    if (f.transition == transition || f.companion == transition) {
      rate += checked_rate(f.rate(state), "unit family rate");
    }
  }
  return rate;
}

double marginal_rate(const SystemSpec& spec, const StateVector& state,
                     std::string_view from, std::string_view to, Count k) {
  const int idx = spec.transition_index(from, to);
  if (idx < 0) {
    throw UnknownTransition("unknown transition '" + std::string(from) + "->" +
                            std::string(to) + "'");
  }
  return marginal_rate(spec, state, idx, k);
}

}  // namespace cojump
