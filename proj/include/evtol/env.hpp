#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "evtol/scenario.hpp"

namespace evtol {

/// Absolute slack on battery feasibility checks, in kWh.
inline constexpr double kBatteryEpsilon = 1e-9;

class EpisodeFinished : public std::logic_error {
 public:
  EpisodeFinished() : std::logic_error("episode already finished") {}
};

struct EvtolState {
  double battery = 0.0;
  VertiportId location = 0;

  bool operator==(const EvtolState&) const = default;
};

struct SimState {
  int t = 0;
  std::vector<EvtolState> evtols;
  std::vector<int> remaining_demand;  // per route, current step
  double price_now = 0.0;

  bool operator==(const SimState&) const = default;
};

/// 0 recharges, the eVTOL's own vertiport waits, any other vertiport flies there.
struct AgentAction {
  int value = 0;

  static constexpr AgentAction recharge() { return AgentAction{0}; }
  static constexpr AgentAction wait_at(VertiportId here) { return AgentAction{here}; }

  bool operator==(const AgentAction&) const = default;
};

enum class ActionKind { recharge, wait, transport };

constexpr ActionKind kind_of(AgentAction a, VertiportId here) {
  if (a.value == 0) return ActionKind::recharge;
  if (a.value == here) return ActionKind::wait;
  return ActionKind::transport;
}

struct Dollars {
  double revenue = 0.0;
  double operating_cost = 0.0;
  double recharge_cost = 0.0;

  double profit() const { return revenue - operating_cost - recharge_cost; }
  Dollars& operator+=(const Dollars& o) {
    revenue += o.revenue;
    operating_cost += o.operating_cost;
    recharge_cost += o.recharge_cost;
    return *this;
  }
  bool operator==(const Dollars&) const = default;
};

struct StepOutcome {
  std::vector<double> rewards;            // normalized, per eVTOL
  std::vector<Dollars> dollars;           // per eVTOL
  std::vector<int> carried;               // passengers per eVTOL
  std::vector<int> passengers;            // passengers moved per route
  std::vector<AgentAction> resolved;      // after infeasibility downgrades
  SimState next;

  double team_reward() const;
  Dollars total_dollars() const;
};

SimState reset(const Scenario& scenario);

/// Hours of flight on (from, to); throws NoSuchRoute.
double flight_time(VertiportId from, VertiportId to, const Scenario& scenario);
double flight_energy(VertiportId from, VertiportId to, const Scenario& scenario);
/// Raw battery update; may go negative, callers check feasibility first.
double battery_after_flight(double battery, VertiportId from, VertiportId to,
                            const Scenario& scenario);
bool can_fly(double battery, VertiportId from, VertiportId to, const Scenario& scenario);

double reward_recharge(double battery, double price, double battery_max, double price_max);
double reward_transport(int passengers, double length_miles, const EconParams& econ, int capacity,
                        double max_length_miles);

/// Count of eVTOLs at each vertiport, indexed 1..M (slot 0 unused).
std::vector<int> pad_occupancy(const SimState& state, const Scenario& scenario);

/// Actions available to eVTOL `i` given committed pads per vertiport
/// (indexed 1..M, see PadLedger). Recharge and wait are always present.
std::vector<AgentAction> feasible_actions(const SimState& state, int i,
                                          std::span<const int> pads_committed,
                                          const Scenario& scenario);

/// Same rule as feasible_actions, as an M+1 wide mask.
std::vector<bool> feasible_mask(const SimState& state, int i, std::span<const int> pads_committed,
                                const Scenario& scenario);

/// Tracks pad commitments while eVTOLs commit to actions one at a time.
/// A pad stays held for the whole step by whoever sits on it at the start,
/// so committed counts are current occupants plus accepted arrivals.
class PadLedger {
 public:
  PadLedger(const SimState& state, const Scenario& scenario);

  std::span<const int> committed() const { return occupancy_; }
  /// Applies the action if feasible; returns the action actually taken.
  AgentAction commit(const SimState& state, int i, AgentAction action, const Scenario& scenario);

 private:
  std::vector<int> occupancy_;
};

/// Resolves one time step. Pure in (state, actions, scenario).
///
/// Actions whose flight is unroutable or lacks battery become waits. Departing
/// eVTOLs keep their pad until the step ends, so arrivals at a vertiport are
/// limited to its free pads at the start of the step; excess arrivals are
/// turned into waits from the highest index down. Passengers are then
/// allocated in index order. The set of accepted flights depends only on pad
/// counts, never on which eVTOL index sits where.
StepOutcome resolve_step(const SimState& state, std::span<const AgentAction> actions,
                         const Scenario& scenario);

}  // namespace evtol
