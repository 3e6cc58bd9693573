#include "evtol/env.hpp"

#include <algorithm>
#include <string>

namespace evtol {
namespace {

const Route& route_or_throw(VertiportId from, VertiportId to, const Scenario& s) {
  const auto idx = s.network.route_index(from, to);
  if (!idx) throw NoSuchRoute(from, to);
  return s.network.routes[*idx];
}

bool transport_allowed(const EvtolState& e, VertiportId dest, std::span<const int> committed,
                       const Scenario& s) {
  if (!s.network.route_index(e.location, dest)) return false;
  if (!can_fly(e.battery, e.location, dest, s)) return false;
  return committed[dest] < s.network.pads_per_vertiport;
}

}  // namespace

double StepOutcome::team_reward() const {
  double sum = 0.0;
  for (double r : rewards) sum += r;
  return sum;
}

Dollars StepOutcome::total_dollars() const {
  Dollars sum;
  for (const auto& d : dollars) sum += d;
  return sum;
}

SimState reset(const Scenario& s) {
  SimState state;
  state.t = 0;
  state.evtols.reserve(s.fleet.count);
  for (int i = 0; i < s.fleet.count; ++i) {
    state.evtols.push_back({s.fleet.initial_batteries[i], s.fleet.initial_locations[i]});
  }
  state.remaining_demand = s.schedules.demand.at(0);
  state.price_now = s.schedules.prices.at(0);
  return state;
}

double flight_time(VertiportId from, VertiportId to, const Scenario& s) {
  return route_or_throw(from, to, s).length_miles / s.fleet.cruise_mph;
}

double flight_energy(VertiportId from, VertiportId to, const Scenario& s) {
  return s.fleet.discharge_kw * flight_time(from, to, s);
}

double battery_after_flight(double battery, VertiportId from, VertiportId to, const Scenario& s) {
  return battery - flight_energy(from, to, s);
}

bool can_fly(double battery, VertiportId from, VertiportId to, const Scenario& s) {
  return battery_after_flight(battery, from, to, s) >= -kBatteryEpsilon;
}

double reward_recharge(double battery, double price, double battery_max, double price_max) {
  return -((battery_max - battery) * price) / (battery_max * price_max);
}

double reward_transport(int passengers, double length_miles, const EconParams& econ, int capacity,
                        double max_length_miles) {
  const double per_mile =
      passengers * econ.fare_per_passenger_mile - econ.cost_per_seat_mile * (capacity + 1);
  return per_mile * length_miles / (capacity * max_length_miles);
}

std::vector<int> pad_occupancy(const SimState& state, const Scenario& s) {
  std::vector<int> occ(s.network.vertiports + 1, 0);
  for (const auto& e : state.evtols) ++occ[e.location];
  return occ;
}

std::vector<bool> feasible_mask(const SimState& state, int i, std::span<const int> pads_committed,
                                const Scenario& s) {
  const int m = s.network.vertiports;
  const EvtolState& e = state.evtols.at(i);
  std::vector<bool> mask(m + 1, false);
  mask[0] = true;
  mask[e.location] = true;
  for (VertiportId k = 1; k <= m; ++k) {
    if (k != e.location && transport_allowed(e, k, pads_committed, s)) mask[k] = true;
  }
  return mask;
}

std::vector<AgentAction> feasible_actions(const SimState& state, int i,
                                          std::span<const int> pads_committed, const Scenario& s) {
  const auto mask = feasible_mask(state, i, pads_committed, s);
  std::vector<AgentAction> out;
  for (int a = 0; a < static_cast<int>(mask.size()); ++a) {
    if (mask[a]) out.push_back(AgentAction{a});
  }
  return out;
}

PadLedger::PadLedger(const SimState& state, const Scenario& s)
    : occupancy_(pad_occupancy(state, s)) {}

AgentAction PadLedger::commit(const SimState& state, int i, AgentAction action, const Scenario& s) {
  const EvtolState& e = state.evtols.at(i);
  if (kind_of(action, e.location) != ActionKind::transport) return action;
  if (action.value < 1 || action.value > s.network.vertiports ||
      !transport_allowed(e, action.value, occupancy_, s)) {
    return AgentAction::wait_at(e.location);
  }
  ++occupancy_[action.value];
  return action;
}

StepOutcome resolve_step(const SimState& state, std::span<const AgentAction> actions,
                         const Scenario& s) {
  const int n_steps = s.schedules.steps;
  const int fleet = static_cast<int>(state.evtols.size());
  const int m = s.network.vertiports;
  const int pads = s.network.pads_per_vertiport;
  if (state.t >= n_steps) throw EpisodeFinished();
  if (static_cast<int>(actions.size()) != fleet) {
    throw std::invalid_argument("expected " + std::to_string(fleet) + " actions, got " +
                                std::to_string(actions.size()));
  }

  StepOutcome out;
  out.resolved.assign(actions.begin(), actions.end());
  std::vector<bool> flies(fleet, false);
  for (int i = 0; i < fleet; ++i) {
    const AgentAction a = actions[i];
    if (a.value < 0 || a.value > m) {
      throw std::invalid_argument("action value " + std::to_string(a.value) + " outside 0.." +
                                  std::to_string(m));
    }
    const EvtolState& e = state.evtols[i];
    if (kind_of(a, e.location) != ActionKind::transport) continue;
    if (s.network.route_index(e.location, a.value) && can_fly(e.battery, e.location, a.value, s)) {
      flies[i] = true;
    } else {
      out.resolved[i] = AgentAction::wait_at(e.location);
    }
  }

  // Arrivals fill free pads in index order.
  std::vector<int> held = pad_occupancy(state, s);
  for (int i = 0; i < fleet; ++i) {
    if (!flies[i]) continue;
    const VertiportId dest = actions[i].value;
    if (held[dest] < pads) {
      ++held[dest];
    } else {
      flies[i] = false;
      out.resolved[i] = AgentAction::wait_at(state.evtols[i].location);
    }
  }

  const double b_max = s.fleet.battery_kwh;
  const double e_max = s.schedules.max_price();
  const double l_max = s.network.max_route_length();
  const int capacity = s.fleet.capacity;

  out.rewards.assign(fleet, 0.0);
  out.dollars.assign(fleet, Dollars{});
  out.carried.assign(fleet, 0);
  out.passengers.assign(s.network.routes.size(), 0);
  out.next = state;
  std::vector<int> remaining = state.remaining_demand;

  for (int i = 0; i < fleet; ++i) {
    const EvtolState& e = state.evtols[i];
    EvtolState& after = out.next.evtols[i];
    switch (kind_of(out.resolved[i], e.location)) {
      case ActionKind::recharge:
        out.dollars[i].recharge_cost = (b_max - e.battery) * state.price_now;
        out.rewards[i] = reward_recharge(e.battery, state.price_now, b_max, e_max);
        after.battery = b_max;
        break;
      case ActionKind::wait:
        break;
      case ActionKind::transport: {
        const VertiportId dest = out.resolved[i].value;
        const std::size_t r = *s.network.route_index(e.location, dest);
        const double length = s.network.routes[r].length_miles;
        const int w = std::min(remaining[r], capacity);
        remaining[r] -= w;
        out.passengers[r] += w;
        out.carried[i] = w;
        out.dollars[i].revenue = w * s.econ.fare_per_passenger_mile * length;
        out.dollars[i].operating_cost = s.econ.cost_per_seat_mile * (capacity + 1) * length;
        out.rewards[i] = reward_transport(w, length, s.econ, capacity, l_max);
        after.battery = std::max(0.0, battery_after_flight(e.battery, e.location, dest, s));
        after.location = dest;
        break;
      }
    }
  }

  out.next.t = state.t + 1;
  if (out.next.t < n_steps) {
    out.next.remaining_demand = s.schedules.demand[out.next.t];
    out.next.price_now = s.schedules.prices[out.next.t];
  } else {
    out.next.remaining_demand.assign(s.network.routes.size(), 0);
  }
  return out;
}

}  // namespace evtol
