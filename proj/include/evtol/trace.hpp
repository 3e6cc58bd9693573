#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "evtol/env.hpp"

namespace evtol {

class IncompleteTrace : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceStep {
  int t = 0;
  std::vector<EvtolState> fleet;       // state at the start of the step
  std::vector<AgentAction> actions;    // resolved
  std::vector<double> rewards;
  std::vector<int> passengers;         // per route
  Dollars dollars;                     // step totals

  bool operator==(const TraceStep&) const = default;
};

struct EpisodeTrace {
  int horizon = 0;  // n
  int evtols = 0;
  int routes = 0;
  std::vector<TraceStep> steps;

  bool complete() const { return static_cast<int>(steps.size()) == horizon; }
  bool operator==(const EpisodeTrace&) const = default;
};

struct EpisodeReturn {
  double reward = 0.0;
  double profit = 0.0;
};

/// Reward total and profit of a complete trace; throws IncompleteTrace otherwise.
EpisodeReturn episode_return(const EpisodeTrace& trace);

TraceStep make_trace_step(const SimState& before, const StepOutcome& outcome);

/// One line per step. Doubles are written in shortest round-trip form so that
/// read_trace_csv(write_trace_csv(x)) == x.
std::string format_trace_csv(const EpisodeTrace& trace);
EpisodeTrace parse_trace_csv(const std::string& text);
void write_trace_csv(const EpisodeTrace& trace, const std::filesystem::path& path);
EpisodeTrace read_trace_csv(const std::filesystem::path& path);

/// Re-runs the trace's resolved actions from reset and returns the replayed
/// trace; used to certify reported profits.
EpisodeTrace replay(const EpisodeTrace& trace, const Scenario& scenario);

/// A running episode: owns its scenario copy, state and trace.
class Episode {
 public:
  explicit Episode(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  const SimState& state() const { return state_; }
  const EpisodeTrace& trace() const { return trace_; }
  bool done() const { return state_.t >= scenario_.schedules.steps; }

  void reset();
  StepOutcome step(std::span<const AgentAction> actions);

 private:
  Scenario scenario_;
  SimState state_;
  EpisodeTrace trace_;
};

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

}  // namespace evtol
