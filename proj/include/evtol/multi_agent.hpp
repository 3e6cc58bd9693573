#pragma once

#include <optional>
#include <vector>

#include "evtol/trace.hpp"

namespace evtol {

class OutOfOrderAgent : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// [t/n, agent one-hot, B_j/B_max per eVTOL, location one-hot per eVTOL,
///  E/E_max, remaining demand / demand scale, committed pads / v per vertiport]
std::size_t multi_observation_size(const Scenario& scenario);

struct AgentStep {
  double reward = 0.0;
  AgentAction resolved;
  int carried = 0;
};

/// Sequential per-agent view of one episode. Agents act in index order within
/// a step and each one sees the demand and pads claimed by the agents before it.
/// When the last agent acts the step is resolved through resolve_step, so the
/// team reward always equals the env's.
class MultiAgentEnv {
 public:
  explicit MultiAgentEnv(Scenario scenario);

  void reset();

  const Scenario& scenario() const { return episode_.scenario(); }
  const Episode& episode() const { return episode_; }
  const SimState& state() const { return episode_.state(); }
  bool done() const { return episode_.done(); }
  int current_agent() const { return next_agent_; }
  int agents() const { return scenario().fleet.count; }

  /// Observation of agent i; i must not have acted yet in this step.
  std::vector<double> observe_agent(int i) const;
  std::vector<bool> feasible(int i) const;

  AgentStep step_agent(int i, AgentAction action);

  /// Outcome of the most recently closed step.
  const std::optional<StepOutcome>& last_outcome() const { return last_outcome_; }

 private:
  void begin_step();

  Episode episode_;
  int next_agent_ = 0;
  std::vector<int> remaining_;
  PadLedger ledger_;
  std::vector<AgentAction> resolved_;
  std::vector<double> rewards_;
  std::optional<StepOutcome> last_outcome_;
};

}  // namespace evtol
