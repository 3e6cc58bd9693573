#include "evtol/multi_agent.hpp"

#include <algorithm>
#include <string>

namespace evtol {

std::size_t multi_observation_size(const Scenario& s) {
  const std::size_t n = s.fleet.count;
  const std::size_t m = s.network.vertiports;
  return 1 + n + n + n * m + 1 + s.network.routes.size() + m;
}

MultiAgentEnv::MultiAgentEnv(Scenario scenario)
    : episode_(std::move(scenario)), ledger_(episode_.state(), episode_.scenario()) {
  begin_step();
}

void MultiAgentEnv::reset() {
  episode_.reset();
  last_outcome_.reset();
  begin_step();
}

void MultiAgentEnv::begin_step() {
  next_agent_ = 0;
  remaining_ = episode_.state().remaining_demand;
  ledger_ = PadLedger(episode_.state(), episode_.scenario());
  resolved_.clear();
  rewards_.clear();
}

std::vector<double> MultiAgentEnv::observe_agent(int i) const {
  if (i != next_agent_ && !done()) {
    throw OutOfOrderAgent("agent " + std::to_string(i) + " observed while agent " +
                          std::to_string(next_agent_) + " is due");
  }
  const Scenario& s = scenario();
  const SimState& st = state();
  const int n = s.fleet.count;
  const int m = s.network.vertiports;
  const double scale = s.schedules.demand_scale();

  std::vector<double> obs;
  obs.reserve(multi_observation_size(s));
  obs.push_back(static_cast<double>(st.t) / s.schedules.steps);
  for (int j = 0; j < n; ++j) obs.push_back(j == i ? 1.0 : 0.0);
  for (const auto& e : st.evtols) obs.push_back(e.battery / s.fleet.battery_kwh);
  for (const auto& e : st.evtols) {
    for (VertiportId k = 1; k <= m; ++k) obs.push_back(e.location == k ? 1.0 : 0.0);
  }
  obs.push_back(st.price_now / s.schedules.max_price());
  if (done()) {
    obs.insert(obs.end(), s.network.routes.size(), 0.0);
  } else {
    for (int d : remaining_) obs.push_back(std::min(1.0, d / scale));
  }
  const auto committed = ledger_.committed();
  for (VertiportId k = 1; k <= m; ++k) {
    obs.push_back(done() ? 0.0
                         : static_cast<double>(committed[k]) / s.network.pads_per_vertiport);
  }
  return obs;
}

std::vector<bool> MultiAgentEnv::feasible(int i) const {
  return feasible_mask(state(), i, ledger_.committed(), scenario());
}

AgentStep MultiAgentEnv::step_agent(int i, AgentAction action) {
  if (done()) throw EpisodeFinished();
  if (i != next_agent_) {
    throw OutOfOrderAgent("agent " + std::to_string(i) + " acted while agent " +
                          std::to_string(next_agent_) + " is due");
  }
  const Scenario& s = scenario();
  const SimState& st = state();
  if (action.value < 0 || action.value > s.network.vertiports) {
    throw std::invalid_argument("action value " + std::to_string(action.value) + " out of range");
  }
  const EvtolState& e = st.evtols[i];

  AgentStep out;
  out.resolved = ledger_.commit(st, i, action, s);
  switch (kind_of(out.resolved, e.location)) {
    case ActionKind::recharge:
      out.reward = reward_recharge(e.battery, st.price_now, s.fleet.battery_kwh,
                                   s.schedules.max_price());
      break;
    case ActionKind::wait:
      break;
    case ActionKind::transport: {
      const std::size_t r = *s.network.route_index(e.location, out.resolved.value);
      out.carried = std::min(remaining_[r], s.fleet.capacity);
      remaining_[r] -= out.carried;
      out.reward = reward_transport(out.carried, s.network.routes[r].length_miles, s.econ,
                                    s.fleet.capacity, s.network.max_route_length());
      break;
    }
  }
  resolved_.push_back(out.resolved);
  rewards_.push_back(out.reward);
  ++next_agent_;

  if (next_agent_ == s.fleet.count) {
    StepOutcome outcome = episode_.step(resolved_);
    if (outcome.resolved != resolved_ || outcome.rewards != rewards_) {
      throw std::logic_error("sequential agent resolution disagrees with resolve_step");
    }
    last_outcome_ = std::move(outcome);
    begin_step();
  }
  return out;
}

}  // namespace evtol
