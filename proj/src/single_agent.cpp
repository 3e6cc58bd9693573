#include "evtol/single_agent.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace evtol {

std::int64_t joint_action_count(int vertiports, int evtols) {
  constexpr std::int64_t kLimit = std::int64_t{1} << 62;
  const std::int64_t base = vertiports + 1;
  std::int64_t count = 1;
  for (int i = 0; i < evtols; ++i) {
    if (count > kLimit / base) throw std::overflow_error("joint action space too large");
    count *= base;
  }
  return count;
}

JointAction encode_joint(std::span<const AgentAction> subactions, int vertiports) {
  std::int64_t index = 0;
  for (const AgentAction a : subactions) {
    if (a.value < 0 || a.value > vertiports) {
      throw std::invalid_argument("sub-action " + std::to_string(a.value) + " outside 0.." +
                                  std::to_string(vertiports));
    }
    index = index * (vertiports + 1) + a.value;
  }
  return JointAction{index};
}

std::vector<AgentAction> decode_joint(JointAction action, int vertiports, int evtols) {
  if (action.index < 0 || action.index >= joint_action_count(vertiports, evtols)) {
    throw std::invalid_argument("joint action index out of range");
  }
  std::vector<AgentAction> out(evtols);
  std::int64_t rest = action.index;
  for (int i = evtols - 1; i >= 0; --i) {
    out[i] = AgentAction{static_cast<int>(rest % (vertiports + 1))};
    rest /= vertiports + 1;
  }
  return out;
}

std::size_t single_observation_size(const Scenario& s) {
  return 1 + s.fleet.count * (1 + s.network.vertiports) + 1 + s.network.routes.size();
}

std::vector<double> observe_single(const SimState& state, const Scenario& s) {
  const int m = s.network.vertiports;
  const double scale = s.schedules.demand_scale();
  std::vector<double> obs;
  obs.reserve(single_observation_size(s));
  obs.push_back(static_cast<double>(state.t) / s.schedules.steps);
  for (const auto& e : state.evtols) {
    obs.push_back(e.battery / s.fleet.battery_kwh);
    for (VertiportId k = 1; k <= m; ++k) obs.push_back(e.location == k ? 1.0 : 0.0);
  }
  obs.push_back(state.price_now / s.schedules.max_price());
  for (int d : state.remaining_demand) obs.push_back(std::min(1.0, d / scale));
  return obs;
}

std::vector<bool> joint_feasible_mask(const SimState& state, const Scenario& s) {
  const int m = s.network.vertiports;
  const int fleet = static_cast<int>(state.evtols.size());
  const auto occupancy = pad_occupancy(state, s);
  std::vector<std::vector<bool>> per_evtol;
  per_evtol.reserve(fleet);
  for (int i = 0; i < fleet; ++i) per_evtol.push_back(feasible_mask(state, i, occupancy, s));

  const std::int64_t count = joint_action_count(m, fleet);
  std::vector<bool> mask(static_cast<std::size_t>(count), true);
  for (std::int64_t idx = 0; idx < count; ++idx) {
    std::int64_t rest = idx;
    for (int i = fleet - 1; i >= 0; --i) {
      if (!per_evtol[i][rest % (m + 1)]) {
        mask[idx] = false;
        break;
      }
      rest /= m + 1;
    }
  }
  return mask;
}

SingleStep step_single(Episode& episode, JointAction action) {
  if (episode.done()) throw EpisodeFinished();
  const Scenario& s = episode.scenario();
  const auto subactions = decode_joint(action, s.network.vertiports, s.fleet.count);
  SingleStep out;
  out.outcome = episode.step(subactions);
  out.reward = out.outcome.team_reward();
  out.done = episode.done();
  out.observation = observe_single(episode.state(), s);
  return out;
}

}  // namespace evtol
