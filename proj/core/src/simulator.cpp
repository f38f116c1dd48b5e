#include "cojump/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "cojump/csv.hpp"
#include "cojump/errors.hpp"

namespace cojump {

namespace {

// Memo key: source occupancies, the per-capita rate quantized to 12
// significant digits, and the exact bits of tau.
struct TableKey {
  int y1, y2;
  std::uint64_t delta_q;
  std::uint64_t tau_bits;
  bool operator==(const TableKey&) const = default;
};

struct TableKeyHash {
  std::size_t operator()(const TableKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    const auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 0x100000001b3ull;
    };
    mix(static_cast<std::uint64_t>(k.y1));
    mix(static_cast<std::uint64_t>(k.y2));
    mix(k.delta_q);
    mix(k.tau_bits);
    return static_cast<std::size_t>(h);
  }
};

std::uint64_t quantize12(double x) {
  if (x == 0.0) return 0;
  int e = 0;
  const double mantissa = std::frexp(x, &e);  // in [0.5, 1)
  const auto q = static_cast<std::uint64_t>(std::llround(std::ldexp(mantissa, 41)));
  return (q << 12) ^ static_cast<std::uint64_t>(e + 2048);
}

std::uint64_t double_bits(double x) {
  std::uint64_t b;
  static_assert(sizeof(b) == sizeof(x));
  __builtin_memcpy(&b, &x, sizeof(b));
  return b;
}

struct FamilyRates {
  std::vector<double> unit;    // per unit family
  std::vector<double> cojump;  // closed-form totals per co-jump family
  std::vector<double> cojump_delta;
  double lambda = 0.0;
};

FamilyRates evaluate_rates(const SystemSpec& spec, const StateVector& state) {
  FamilyRates r;
  r.unit.reserve(spec.unit_families().size());
  r.cojump.reserve(spec.cojump_families().size());
  for (const UnitFamily& f : spec.unit_families()) {
    const double v = f.rate(state);
    if (!std::isfinite(v) || v < 0.0) {
      throw RateOverflow("unit family rate evaluated non-finite or negative");
    }
    r.unit.push_back(v);
    r.lambda += v;
  }
  for (const CoJumpFamily& f : spec.cojump_families()) {
    const double delta = f.per_capita_rate(state);
    if (!std::isfinite(delta) || delta < 0.0) {
      throw RateOverflow("co-jump per-capita rate evaluated non-finite or negative");
    }
    const Count pool = state[static_cast<std::size_t>(f.source_first)] +
                       state[static_cast<std::size_t>(f.source_second)];
    const double total =
        std::log1p(delta * f.noise.tau * static_cast<double>(pool)) / f.noise.tau;
    r.cojump.push_back(total);
    r.cojump_delta.push_back(delta);
    r.lambda += total;
  }
  if (!std::isfinite(r.lambda)) throw RateOverflow("rate function is not finite");
  return r;
}

JumpEvent sample_event(const SystemSpec& spec, const StateVector& state,
                       const FamilyRates& rates, Rng& rng) {
  double target = rng.uniform01() * rates.lambda;
  // Fixed walk order: unit families first, then co-jump families.
  for (std::size_t i = 0; i < rates.unit.size(); ++i) {
    if (target < rates.unit[i]) {
      const UnitFamily& f = spec.unit_families()[i];
      std::vector<std::pair<int, Count>> inc{{f.transition, 1}};
      if (f.companion >= 0) inc.emplace_back(f.companion, 1);
      return spec.make_event(std::move(inc));
    }
    target -= rates.unit[i];
  }
  std::size_t pick = rates.cojump.empty() ? 0 : rates.cojump.size() - 1;
  for (std::size_t i = 0; i < rates.cojump.size(); ++i) {
    if (target < rates.cojump[i]) {
      pick = i;
      break;
    }
    target -= rates.cojump[i];
  }
  const CoJumpFamily& f = spec.cojump_families()[pick];
  const int y1 = static_cast<int>(state[static_cast<std::size_t>(f.source_first)]);
  const int y2 = static_cast<int>(state[static_cast<std::size_t>(f.source_second)]);
  const auto table =
      detail::cached_pairwise_table(y1, y2, rates.cojump_delta[pick], f.noise.tau);
  const auto [k1, k2] = table->sample(rng.uniform01());
  std::vector<std::pair<int, Count>> inc;
  if (k1 > 0) inc.emplace_back(f.first, k1);
  if (k2 > 0) inc.emplace_back(f.second, k2);
  return spec.make_event(std::move(inc));
}

void accumulate_counts(CountVector& counts, const JumpEvent& event) {
  for (const auto& [t, k] : event.increments) {
    counts[static_cast<std::size_t>(t)] += k;
  }
}

}  // namespace

namespace detail {

std::shared_ptr<const PairwiseRateTable> cached_pairwise_table(int y1, int y2,
                                                               double delta,
                                                               double tau) {
  thread_local std::unordered_map<TableKey, std::shared_ptr<const PairwiseRateTable>,
                                  TableKeyHash>
      cache;
  const TableKey key{y1, y2, quantize12(delta), double_bits(tau)};
  if (const auto it = cache.find(key); it != cache.end()) return it->second;
  if (cache.size() >= 4096) cache.clear();
  auto table = std::make_shared<const PairwiseRateTable>(
      PairwiseRateTable::build(y1, y2, delta, GammaNoiseParams{tau}));
  cache.emplace(key, table);
  return table;
}

}  // namespace detail

std::optional<NextEvent> next_event(const SystemSpec& spec, const StateVector& state,
                                    Rng& rng) {
  const FamilyRates rates = evaluate_rates(spec, state);
  if (rates.lambda <= 0.0) return std::nullopt;
  NextEvent out;
  out.waiting_time = rng.exponential(rates.lambda);
  out.event = sample_event(spec, state, rates, rng);
  return out;
}

Trajectory simulate(const SystemSpec& spec, const StateVector& init, double t_end,
                    RngStream stream, SimulateOptions options) {
  Rng rng(stream);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(init);
  traj.counts.emplace_back(spec.transition_count());

  double t = 0.0;
  StateVector state = init;
  CountVector counts(spec.transition_count());
  while (true) {
    const FamilyRates rates = evaluate_rates(spec, state);
    if (rates.lambda <= 0.0) break;  // absorbed; a clean end, not a failure
    const double wait = rng.exponential(rates.lambda);
    if (t + wait > t_end) break;
    if (traj.events.size() >= options.event_budget) {
      throw EventBudgetExceeded("event budget " + std::to_string(options.event_budget) +
                                " exceeded at t = " + std::to_string(t));
    }
    t += wait;
    JumpEvent event = sample_event(spec, state, rates, rng);
    state = apply_jump(spec, state, event);
    accumulate_counts(counts, event);
    traj.times.push_back(t);
    traj.states.push_back(state);
    traj.counts.push_back(counts);
    traj.events.push_back(std::move(event));
  }
  return traj;
}

WindowResult run_window(const SystemSpec& spec, const StateVector& init, double h,
                        Rng& rng, std::uint64_t event_budget) {
  WindowResult out;
  out.state = init;
  out.counts = CountVector(spec.transition_count());
  double t = 0.0;
  while (true) {
    const FamilyRates rates = evaluate_rates(spec, out.state);
    if (rates.lambda <= 0.0) break;
    const double wait = rng.exponential(rates.lambda);
    if (t + wait > h) break;
    if (out.events >= event_budget) {
      throw EventBudgetExceeded("event budget exceeded in window");
    }
    t += wait;
    const JumpEvent event = sample_event(spec, out.state, rates, rng);
    out.state = apply_jump(spec, out.state, event);
    accumulate_counts(out.counts, event);
    ++out.events;
  }
  return out;
}

std::pair<Count, Count> simulate_subordinated_bivariate_death(
    std::pair<Count, Count> y0, double delta, GammaNoiseParams noise, double h,
    Rng& rng) {
  if (y0.first == 0 && y0.second == 0) return {0, 0};
  const double g = rng.gamma(h / noise.tau, noise.tau);
  const double p = -std::expm1(-delta * g);
  const Count d1 = rng.binomial(y0.first, p);
  const Count d2 = rng.binomial(y0.second, p);
  return {d1, d2};
}

EventDescription describe_event(const SystemSpec& spec, const JumpEvent& event) {
  // Families claim their transitions uniquely, so the first increment that
  // belongs to a family identifies the event's origin.
  for (const auto& [t, k] : event.increments) {
    for (const CoJumpFamily& f : spec.cojump_families()) {
      if (f.first != t && f.second != t) continue;
      EventDescription d;
      d.type = spec.transitions()[static_cast<std::size_t>(f.first)].label() + "+" +
               spec.transitions()[static_cast<std::size_t>(f.second)].label();
      for (const auto& [t2, k2] : event.increments) {
        if (t2 == f.first) d.k1 = k2;
        if (t2 == f.second) d.k2 = k2;
      }
      return d;
    }
  }
  for (const auto& [t, k] : event.increments) {
    for (const UnitFamily& f : spec.unit_families()) {
      if (f.transition != t) continue;
      return {spec.transitions()[static_cast<std::size_t>(t)].label(), 1, 0};
    }
  }
  // Hand-built event outside any family: report the raw increments.
  EventDescription d;
  for (const auto& [t, k] : event.increments) {
    if (!d.type.empty()) d.type += "+";
    d.type += spec.transitions()[static_cast<std::size_t>(t)].label();
  }
  d.k1 = event.increments.empty() ? 0 : event.increments.front().second;
  return d;
}

void write_trajectory_csv(std::ostream& os, const SystemSpec& spec,
                          const Trajectory& trajectory) {
  std::vector<std::string> row{"time", "event_type", "k1", "k2"};
  for (const std::string& c : spec.compartments()) row.push_back(c);
  write_csv_row(os, row);

  const auto state_row = [&](double t, const std::string& type, Count k1, Count k2,
                             const StateVector& s) {
    row.clear();
    row.push_back(format_fixed(t, 9));
    row.push_back(type);
    row.push_back(std::to_string(k1));
    row.push_back(std::to_string(k2));
    for (std::size_t c = 0; c < s.size(); ++c) row.push_back(std::to_string(s[c]));
    write_csv_row(os, row);
  };

  state_row(0.0, "init", 0, 0, trajectory.states.front());
  for (std::size_t k = 0; k < trajectory.events.size(); ++k) {
    const EventDescription d = describe_event(spec, trajectory.events[k]);
    state_row(trajectory.times[k + 1], d.type, d.k1, d.k2, trajectory.states[k + 1]);
  }
}

void validate_trajectory(const SystemSpec& spec, const Trajectory& traj) {
  const std::size_t steps = traj.events.size();
  if (traj.times.size() != steps + 1 || traj.states.size() != steps + 1 ||
      traj.counts.size() != steps + 1) {
    throw Error("trajectory arrays have inconsistent lengths");
  }
  const StateVector& init = traj.states.front();
  for (std::size_t k = 0; k < steps; ++k) {
    if (!(traj.times[k + 1] > traj.times[k])) {
      throw Error("event times are not strictly increasing");
    }
    if (apply_jump(spec, traj.states[k], traj.events[k]) != traj.states[k + 1]) {
      throw Error("state does not match the applied event at step " + std::to_string(k));
    }
    CountVector expected = traj.counts[k];
    for (const auto& [t, inc] : traj.events[k].increments) {
      if (inc <= 0) throw Error("non-positive count increment");
      expected[static_cast<std::size_t>(t)] += inc;
    }
    if (expected != traj.counts[k + 1]) {
      throw Error("counts do not match the event increments at step " + std::to_string(k));
    }
  }
  // Mass conservation: occupancy change equals inflow minus outflow counts,
  // exactly, at every recorded step.
  for (std::size_t k = 0; k <= steps; ++k) {
    for (std::size_t c = 0; c < spec.compartment_count(); ++c) {
      Count flow = 0;
      for (std::size_t t = 0; t < spec.transition_count(); ++t) {
        const Transition& tr = spec.transitions()[t];
        if (spec.compartment_index(tr.to) == static_cast<int>(c)) flow += traj.counts[k][t];
        if (spec.compartment_index(tr.from) == static_cast<int>(c)) flow -= traj.counts[k][t];
      }
      if (traj.states[k][c] != init[c] + flow) {
        throw Error("mass conservation violated for compartment '" +
                    spec.compartments()[c] + "' at step " + std::to_string(k));
      }
    }
    if (spec.fixed_population() >= 0 &&
        traj.states[k].total() != spec.fixed_population()) {
      throw Error("closed-system population changed at step " + std::to_string(k));
    }
  }
}

}  // namespace cojump
