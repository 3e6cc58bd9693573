#include "evtol/trace.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace evtol {
namespace {

constexpr const char* kTraceMagic = "# evtol-trace horizon=";

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

int parse_int(const std::string& text) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("bad integer '" + text + "' in trace");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("bad number '" + text + "'");
  }
  return value;
}

EpisodeReturn episode_return(const EpisodeTrace& trace) {
  if (!trace.complete()) {
    throw IncompleteTrace("trace has " + std::to_string(trace.steps.size()) + " of " +
                          std::to_string(trace.horizon) + " steps");
  }
  EpisodeReturn out;
  for (const auto& step : trace.steps) {
    for (double r : step.rewards) out.reward += r;
    out.profit += step.dollars.profit();
  }
  return out;
}

TraceStep make_trace_step(const SimState& before, const StepOutcome& outcome) {
  TraceStep step;
  step.t = before.t;
  step.fleet = before.evtols;
  step.actions = outcome.resolved;
  step.rewards = outcome.rewards;
  step.passengers = outcome.passengers;
  step.dollars = outcome.total_dollars();
  return step;
}

std::string format_trace_csv(const EpisodeTrace& trace) {
  std::ostringstream out;
  out << kTraceMagic << trace.horizon << "\n";
  out << "t";
  for (int i = 1; i <= trace.evtols; ++i) out << ",location_" << i << ",battery_" << i;
  for (int i = 1; i <= trace.evtols; ++i) out << ",action_" << i;
  for (int i = 1; i <= trace.evtols; ++i) out << ",reward_" << i;
  for (int r = 1; r <= trace.routes; ++r) out << ",passengers_route_" << r;
  out << ",revenue,operating_cost,recharge_cost\n";
  for (const auto& s : trace.steps) {
    out << s.t;
    for (const auto& e : s.fleet) out << ',' << e.location << ',' << format_double(e.battery);
    for (const auto& a : s.actions) out << ',' << a.value;
    for (double r : s.rewards) out << ',' << format_double(r);
    for (int w : s.passengers) out << ',' << w;
    out << ',' << format_double(s.dollars.revenue) << ',' << format_double(s.dollars.operating_cost)
        << ',' << format_double(s.dollars.recharge_cost) << "\n";
  }
  return out.str();
}

EpisodeTrace parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind(kTraceMagic, 0) != 0) {
    throw ParseError("missing trace preamble");
  }
  EpisodeTrace trace;
  trace.horizon = parse_int(line.substr(std::string(kTraceMagic).size()));
  if (!std::getline(in, line)) throw ParseError("missing trace header");
  const auto header = split(line, ',');
  for (const auto& h : header) {
    if (h.rfind("action_", 0) == 0) ++trace.evtols;
    if (h.rfind("passengers_route_", 0) == 0) ++trace.routes;
  }
  const std::size_t width = 1 + 4 * trace.evtols + trace.routes + 3;
  if (header.size() != width) throw ParseError("trace header has unexpected width");

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != width) throw ParseError("trace row has " + std::to_string(cells.size()) +
                                                " cells, expected " + std::to_string(width));
    TraceStep s;
    std::size_t c = 0;
    s.t = parse_int(cells[c++]);
    for (int i = 0; i < trace.evtols; ++i) {
      EvtolState e;
      e.location = parse_int(cells[c++]);
      e.battery = parse_double(cells[c++]);
      s.fleet.push_back(e);
    }
    for (int i = 0; i < trace.evtols; ++i) s.actions.push_back(AgentAction{parse_int(cells[c++])});
    for (int i = 0; i < trace.evtols; ++i) s.rewards.push_back(parse_double(cells[c++]));
    for (int r = 0; r < trace.routes; ++r) s.passengers.push_back(parse_int(cells[c++]));
    s.dollars.revenue = parse_double(cells[c++]);
    s.dollars.operating_cost = parse_double(cells[c++]);
    s.dollars.recharge_cost = parse_double(cells[c++]);
    trace.steps.push_back(std::move(s));
  }
  return trace;
}

void write_trace_csv(const EpisodeTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  out << format_trace_csv(trace);
}

EpisodeTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_trace_csv(buffer.str());
}

EpisodeTrace replay(const EpisodeTrace& trace, const Scenario& scenario) {
  Episode episode(scenario);
  for (const auto& step : trace.steps) episode.step(step.actions);
  return episode.trace();
}

Episode::Episode(Scenario scenario) : scenario_(std::move(scenario)) { reset(); }

void Episode::reset() {
  state_ = evtol::reset(scenario_);
  trace_ = EpisodeTrace{};
  trace_.horizon = scenario_.schedules.steps;
  trace_.evtols = scenario_.fleet.count;
  trace_.routes = static_cast<int>(scenario_.network.routes.size());
}

StepOutcome Episode::step(std::span<const AgentAction> actions) {
  StepOutcome outcome = resolve_step(state_, actions, scenario_);
  trace_.steps.push_back(make_trace_step(state_, outcome));
  state_ = outcome.next;
  return outcome;
}

}  // namespace evtol
