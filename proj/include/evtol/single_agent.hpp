#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evtol/trace.hpp"

namespace evtol {

/// Index into the (M+1)^N joint action space; eVTOL 1 is the most significant digit.
struct JointAction {
  std::int64_t index = 0;

  bool operator==(const JointAction&) const = default;
};

/// (M+1)^N, or throws std::overflow_error past 2^62.
std::int64_t joint_action_count(int vertiports, int evtols);

JointAction encode_joint(std::span<const AgentAction> subactions, int vertiports);
std::vector<AgentAction> decode_joint(JointAction action, int vertiports, int evtols);

/// [t/n, (B_i/B_max, location one-hot) per eVTOL, E/E_max, demand / demand scale]
std::size_t single_observation_size(const Scenario& scenario);
std::vector<double> observe_single(const SimState& state, const Scenario& scenario);

/// Joint actions whose every sub-action is individually routable, flyable and
/// aimed at a vertiport with a free pad. Pad contention between sub-actions is
/// left to resolve_step.
std::vector<bool> joint_feasible_mask(const SimState& state, const Scenario& scenario);

struct SingleStep {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  StepOutcome outcome;
};

SingleStep step_single(Episode& episode, JointAction action);

}  // namespace evtol
