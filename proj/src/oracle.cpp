#include "evtol/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evtol/single_agent.hpp"

namespace evtol::oracle {
namespace {

constexpr double kClassTolerance = 1e-9;
constexpr double kIndexTolerance = 1e-6;

/// Sorted (location, battery class) codes; one entry per eVTOL.
using Key = std::vector<std::uint32_t>;

struct Transition {
  std::vector<AgentAction> actions;
  StepOutcome outcome;
  double profit = 0.0;
};

class Model {
 public:
  explicit Model(const Scenario& s) : scenario_(s), classes_(s) {}

  const Scenario& scenario() const { return scenario_; }
  const BatteryClasses& classes() const { return classes_; }

  Key canonical(const SimState& state) const {
    Key key;
    key.reserve(state.evtols.size());
    for (const auto& e : state.evtols) {
      key.push_back(static_cast<std::uint32_t>((e.location - 1) * classes_.size() +
                                               classes_.index_of(e.battery)));
    }
    std::sort(key.begin(), key.end());
    return key;
  }

  SimState state_of(int t, const Key& key) const {
    SimState st;
    st.t = t;
    for (auto code : key) {
      const auto loc = static_cast<VertiportId>(code / classes_.size()) + 1;
      st.evtols.push_back({classes_.level(code % classes_.size()), loc});
    }
    st.remaining_demand = scenario_.schedules.demand[t];
    st.price_now = scenario_.schedules.prices[t];
    return st;
  }

  /// Visits every joint action built from individually feasible sub-actions,
  /// eVTOL 1 most significant. Pad contention between sub-actions is resolved
  /// by the env into an outcome some other visited action also reaches.
  void for_each_transition(const SimState& state,
                           const std::function<void(const Transition&)>& visit) const {
    const int fleet = static_cast<int>(state.evtols.size());
    const auto occupancy = pad_occupancy(state, scenario_);
    std::vector<std::vector<AgentAction>> options;
    options.reserve(fleet);
    for (int i = 0; i < fleet; ++i) options.push_back(feasible_actions(state, i, occupancy, scenario_));

    std::vector<std::size_t> digit(fleet, 0);
    Transition tr;
    tr.actions.resize(fleet);
    for (;;) {
      for (int i = 0; i < fleet; ++i) tr.actions[i] = options[i][digit[i]];
      tr.outcome = resolve_step(state, tr.actions, scenario_);
      tr.profit = tr.outcome.total_dollars().profit();
      visit(tr);
      int pos = fleet - 1;
      while (pos >= 0 && ++digit[pos] == options[pos].size()) {
        digit[pos] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
  }

 private:
  const Scenario& scenario_;
  BatteryClasses classes_;
};

/// V(t, key) for the layered solver: per step, sorted keys and their values.
struct Layers {
  std::vector<std::vector<Key>> keys;
  std::vector<std::vector<double>> values;

  double value(int t, const Key& key) const {
    if (t >= static_cast<int>(keys.size())) return 0.0;
    const auto& layer = keys[t];
    const auto it = std::lower_bound(layer.begin(), layer.end(), key);
    if (it == layer.end() || *it != key) throw std::logic_error("state missing from layer");
    return values[t][static_cast<std::size_t>(it - layer.begin())];
  }
};

Layers solve_layered(const Model& model, const SimState& root, std::int64_t& transitions) {
  const int steps = model.scenario().schedules.steps;
  Layers layers;
  layers.keys.resize(steps);
  layers.values.resize(steps);
  layers.keys[0].push_back(model.canonical(root));

  std::int64_t count = 0;
  for (int t = 0; t + 1 < steps; ++t) {
    const auto& current = layers.keys[t];
    const auto n_states = static_cast<std::int64_t>(current.size());
    std::vector<Key> next;
#pragma omp parallel
    {
      std::vector<Key> local;
      std::int64_t local_count = 0;
#pragma omp for schedule(dynamic, 8) nowait
      for (std::int64_t s = 0; s < n_states; ++s) {
        model.for_each_transition(model.state_of(t, current[s]), [&](const Transition& tr) {
          local.push_back(model.canonical(tr.outcome.next));
          ++local_count;
        });
      }
#pragma omp critical
      {
        next.insert(next.end(), local.begin(), local.end());
        count += local_count;
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    layers.keys[t + 1] = std::move(next);
  }

  for (int t = steps - 1; t >= 0; --t) {
    const auto& current = layers.keys[t];
    const auto n_states = static_cast<std::int64_t>(current.size());
    std::vector<double> values(current.size(), 0.0);
    std::int64_t layer_count = 0;
#pragma omp parallel for schedule(dynamic, 8) reduction(+ : layer_count)
    for (std::int64_t s = 0; s < n_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      model.for_each_transition(model.state_of(t, current[s]), [&](const Transition& tr) {
        const double v = tr.profit + layers.value(t + 1, model.canonical(tr.outcome.next));
        if (v > best) best = v;
        ++layer_count;
      });
      values[s] = best;
    }
    count += layer_count;
    layers.values[t] = std::move(values);
  }
  transitions = count;
  return layers;
}

class MemoSolver {
 public:
  explicit MemoSolver(const Model& model)
      : model_(model), memo_(model.scenario().schedules.steps) {}

  double value(int t, const Key& key) {
    if (t >= model_.scenario().schedules.steps) return 0.0;
    auto& table = memo_[t];
    if (const auto it = table.find(key); it != table.end()) return it->second;
    double best = -std::numeric_limits<double>::infinity();
    model_.for_each_transition(model_.state_of(t, key), [&](const Transition& tr) {
      ++transitions_;
      const double v = tr.profit + value(t + 1, model_.canonical(tr.outcome.next));
      if (v > best) best = v;
    });
    table.emplace(key, best);
    return best;
  }

  std::int64_t states() const {
    std::int64_t n = 0;
    for (const auto& table : memo_) n += static_cast<std::int64_t>(table.size());
    return n;
  }
  std::int64_t transitions() const { return transitions_; }

 private:
  const Model& model_;
  std::vector<std::map<Key, double>> memo_;
  std::int64_t transitions_ = 0;
};

OptResult certify(const Scenario& scenario, double profit,
                  std::vector<std::vector<AgentAction>> actions) {
  OptResult out;
  out.profit = profit;
  Episode episode(scenario);
  for (const auto& step : actions) episode.step(step);
  out.certificate = episode.trace();
  out.reward = episode_return(out.certificate).reward;
  out.actions = std::move(actions);
  return out;
}

double choose(double n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

BatteryClasses::BatteryClasses(const Scenario& s) {
  std::vector<double> energies;
  for (const auto& r : s.network.routes) {
    energies.push_back(s.fleet.discharge_kw * (r.length_miles / s.fleet.cruise_mph));
  }
  std::vector<double> frontier(s.fleet.initial_batteries.begin(), s.fleet.initial_batteries.end());
  frontier.push_back(s.fleet.battery_kwh);
  auto merge = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v) {
      if (out.empty() || x - out.back() > kClassTolerance) out.push_back(x);
    }
    v.swap(out);
  };
  merge(frontier);
  levels_ = frontier;
  for (int depth = 0; depth < s.schedules.steps && !frontier.empty(); ++depth) {
    std::vector<double> next;
    for (double b : frontier) {
      for (double e : energies) {
        if (b - e >= -kBatteryEpsilon) next.push_back(std::max(0.0, b - e));
      }
    }
    merge(next);
    std::vector<double> fresh;
    for (double x : next) {
      const auto it = std::lower_bound(levels_.begin(), levels_.end(), x - kClassTolerance);
      if (it == levels_.end() || *it - x > kClassTolerance) fresh.push_back(x);
    }
    levels_.insert(levels_.end(), fresh.begin(), fresh.end());
    merge(levels_);
    frontier = std::move(fresh);
  }
}

std::size_t BatteryClasses::index_of(double battery) const {
  const auto it = std::lower_bound(levels_.begin(), levels_.end(), battery - kIndexTolerance);
  if (it == levels_.end() || std::abs(*it - battery) > kIndexTolerance) {
    throw std::logic_error("battery level " + std::to_string(battery) + " is not reachable");
  }
  return static_cast<std::size_t>(it - levels_.begin());
}

double estimate_states(const Scenario& s) {
  const BatteryClasses classes(s);
  const double slots = static_cast<double>(s.network.vertiports) * static_cast<double>(classes.size());
  return s.schedules.steps * choose(slots + s.fleet.count - 1, s.fleet.count);
}

OptResult solve_exact(const Scenario& scenario, const OracleOptions& options) {
  validate(scenario);
  const double estimate = estimate_states(scenario);
  if (estimate > options.state_budget) {
    throw BudgetExceeded("estimated " + std::to_string(static_cast<long long>(estimate)) +
                             " DP states exceed the budget",
                         estimate);
  }
  const Model model(scenario);
  const SimState root = reset(scenario);
  const int steps = scenario.schedules.steps;

  std::function<double(int, const Key&)> value_of;
  std::int64_t states = 0;
  std::int64_t transitions = 0;
  Layers layers;
  std::unique_ptr<MemoSolver> memo;
  if (options.exec == kernels::Exec::parallel) {
    layers = solve_layered(model, root, transitions);
    for (const auto& layer : layers.keys) states += static_cast<std::int64_t>(layer.size());
    value_of = [&](int t, const Key& k) { return layers.value(t, k); };
  } else {
    memo = std::make_unique<MemoSolver>(model);
    memo->value(0, model.canonical(root));
    states = memo->states();
    transitions = memo->transitions();
    value_of = [&](int t, const Key& k) { return memo->value(t, k); };
  }
  const double optimum = value_of(0, model.canonical(root));

  // Walk forward from the real (unsorted) fleet, picking a maximizing joint action each step.
  std::vector<std::vector<AgentAction>> plan;
  SimState state = root;
  for (int t = 0; t < steps; ++t) {
    double best = -std::numeric_limits<double>::infinity();
    Transition chosen;
    model.for_each_transition(state, [&](const Transition& tr) {
      const double v = tr.profit + value_of(t + 1, model.canonical(tr.outcome.next));
      if (v > best) {
        best = v;
        chosen = tr;
      }
    });
    plan.push_back(chosen.outcome.resolved);
    state = chosen.outcome.next;
  }

  OptResult out = certify(scenario, optimum, std::move(plan));
  out.states = states;
  out.transitions = transitions;
  return out;
}

OptResult brute_force(const Scenario& scenario, const OracleOptions& options) {
  validate(scenario);
  const int m = scenario.network.vertiports;
  const int fleet = scenario.fleet.count;
  const int steps = scenario.schedules.steps;
  const double per_step = std::pow(static_cast<double>(m + 1), fleet);
  const double leaves = std::pow(per_step, steps);
  if (leaves > options.leaf_cap) {
    throw BudgetExceeded("brute force would enumerate " +
                             std::to_string(static_cast<long long>(leaves)) + " sequences",
                         leaves);
  }
  const std::int64_t joint = joint_action_count(m, fleet);

  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<AgentAction>> best_plan;
  std::vector<std::vector<AgentAction>> plan;
  std::int64_t visited = 0;
  std::int64_t transitions = 0;

  std::function<void(const SimState&, double)> dfs = [&](const SimState& state, double profit) {
    if (state.t == steps) {
      ++visited;
      if (profit > best) {
        best = profit;
        best_plan = plan;
      }
      return;
    }
    for (std::int64_t idx = 0; idx < joint; ++idx) {
      const auto actions = decode_joint(JointAction{idx}, m, fleet);
      const StepOutcome outcome = resolve_step(state, actions, scenario);
      ++transitions;
      plan.push_back(actions);
      dfs(outcome.next, profit + outcome.total_dollars().profit());
      plan.pop_back();
    }
  };
  dfs(reset(scenario), 0.0);

  OptResult out = certify(scenario, best, std::move(best_plan));
  out.states = visited;
  out.transitions = transitions;
  return out;
}

OptResult greedy_baseline(const Scenario& scenario) {
  validate(scenario);
  const auto& econ = scenario.econ;
  const int capacity = scenario.fleet.capacity;
  std::vector<std::vector<AgentAction>> plan;
  SimState state = reset(scenario);
  double profit = 0.0;
  std::int64_t transitions = 0;
  while (state.t < scenario.schedules.steps) {
    PadLedger ledger(state, scenario);
    std::vector<int> remaining = state.remaining_demand;
    std::vector<AgentAction> actions;
    for (int i = 0; i < static_cast<int>(state.evtols.size()); ++i) {
      const EvtolState& e = state.evtols[i];
      AgentAction pick = AgentAction::wait_at(e.location);
      double pick_value = 0.0;
      for (const AgentAction a : feasible_actions(state, i, ledger.committed(), scenario)) {
        double value = 0.0;
        switch (kind_of(a, e.location)) {
          case ActionKind::wait:
            continue;
          case ActionKind::recharge:
            value = -(scenario.fleet.battery_kwh - e.battery) * state.price_now;
            break;
          case ActionKind::transport: {
            const auto r = *scenario.network.route_index(e.location, a.value);
            const double length = scenario.network.routes[r].length_miles;
            const int w = std::min(remaining[r], capacity);
            value = (w * econ.fare_per_passenger_mile -
                     econ.cost_per_seat_mile * (capacity + 1)) * length;
            break;
          }
        }
        if (value > pick_value) {
          pick_value = value;
          pick = a;
        }
      }
      pick = ledger.commit(state, i, pick, scenario);
      if (kind_of(pick, e.location) == ActionKind::transport) {
        const auto r = *scenario.network.route_index(e.location, pick.value);
        remaining[r] -= std::min(remaining[r], capacity);
      }
      actions.push_back(pick);
    }
    StepOutcome outcome = resolve_step(state, actions, scenario);
    ++transitions;
    profit += outcome.total_dollars().profit();
    plan.push_back(outcome.resolved);
    state = std::move(outcome.next);
  }
  OptResult out = certify(scenario, profit, std::move(plan));
  out.states = scenario.schedules.steps;
  out.transitions = transitions;
  return out;
}

std::optional<Placement> best_initial_placement(const Scenario& scenario,
                                                const OracleOptions& options) {
  const int m = scenario.network.vertiports;
  const int fleet = scenario.fleet.count;
  const int pads = scenario.network.pads_per_vertiport;
  if (estimate_states(scenario) > options.state_budget) return std::nullopt;

  std::optional<Placement> best;
  std::vector<VertiportId> locs(fleet, 1);
  std::function<void(int, VertiportId)> place = [&](int i, VertiportId from) {
    if (i == fleet) {
      Scenario candidate = scenario;
      candidate.fleet.initial_locations = locs;
      const double profit = solve_exact(candidate, options).profit;
      if (!best || profit > best->profit) best = Placement{locs, profit};
      return;
    }
    for (VertiportId k = from; k <= m; ++k) {
      const auto used = std::count(locs.begin(), locs.begin() + i, k);
      if (used >= pads) continue;
      locs[i] = k;
      place(i + 1, k);
    }
  };
  place(0, 1);
  return best;
}

std::string format_opt_result(const OptResult& r, const std::string& label) {
  nlohmann::json doc;
  doc["format"] = 1;
  doc["label"] = label;
  doc["optimal_profit"] = r.profit;
  doc["certified_profit"] = episode_return(r.certificate).profit;
  doc["optimal_reward"] = r.reward;
  doc["states"] = r.states;
  doc["transitions"] = r.transitions;
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t t = 0; t < r.actions.size(); ++t) {
    std::vector<int> acts;
    for (const auto& a : r.actions[t]) acts.push_back(a.value);
    steps.push_back({{"t", t},
                     {"actions", acts},
                     {"passengers", r.certificate.steps[t].passengers},
                     {"profit", r.certificate.steps[t].dollars.profit()}});
  }
  doc["plan"] = steps;
  return doc.dump(2) + "\n";
}

}  // namespace evtol::oracle
