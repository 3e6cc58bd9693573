#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evtol/kernels.hpp"
#include "evtol/trace.hpp"

namespace evtol::oracle {

class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, double estimate)
      : std::runtime_error(what), estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

struct OracleOptions {
  double state_budget = 1e7;  // solve_exact refuses above this estimated state count
  double leaf_cap = 1e7;      // brute_force refuses above this many action sequences
  kernels::Exec exec = kernels::Exec::parallel;
};

struct OptResult {
  double profit = 0.0;             // optimal dollars as computed by the search
  double reward = 0.0;             // normalized return of the certificate rollout
  std::vector<std::vector<AgentAction>> actions;  // per step, per eVTOL
  EpisodeTrace certificate;        // replay of `actions` through the env
  std::int64_t states = 0;         // distinct DP keys (or leaves for brute force)
  std::int64_t transitions = 0;    // resolve_step evaluations
};

/// Reachable battery levels, each addressed by a small integer. Levels within
/// 1e-9 kWh of each other share a class.
class BatteryClasses {
 public:
  explicit BatteryClasses(const Scenario& scenario);

  std::size_t size() const { return levels_.size(); }
  double level(std::size_t idx) const { return levels_[idx]; }
  /// Class of a battery value produced by the env; throws if it is not reachable.
  std::size_t index_of(double battery) const;

 private:
  std::vector<double> levels_;
};

/// Upper bound on DP states: steps x multisets of (location, battery class).
double estimate_states(const Scenario& scenario);

/// Exact optimal dispatch by dynamic programming over canonical fleet states
/// (eVTOLs are interchangeable, so a state is a sorted multiset). With
/// Exec::parallel the value function is computed layer by layer, each layer's
/// states in parallel; Exec::serial runs a memoized depth-first search.
OptResult solve_exact(const Scenario& scenario, const OracleOptions& options = {});

/// Exhaustive enumeration of every joint-action sequence through the env.
OptResult brute_force(const Scenario& scenario, const OracleOptions& options = {});

/// Myopic baseline: each step, each eVTOL in index order takes the feasible
/// action with the best immediate dollar change; ties go to waiting.
OptResult greedy_baseline(const Scenario& scenario);

struct Placement {
  std::vector<VertiportId> locations;
  double profit = 0.0;
};

/// Initial locations maximizing the exact optimal profit; nullopt when every
/// candidate exceeds the state budget.
std::optional<Placement> best_initial_placement(const Scenario& scenario,
                                                const OracleOptions& options = {});

std::string format_opt_result(const OptResult& result, const std::string& label);

}  // namespace evtol::oracle
