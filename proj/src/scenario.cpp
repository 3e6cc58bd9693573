#include "evtol/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace evtol {
namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;
constexpr double kBatteryTolerance = 1e-9;

std::string describe(const Route& r) {
  return "route " + std::to_string(r.from) + "->" + std::to_string(r.to);
}

[[noreturn]] void fail(const std::string& what) { throw ValidationError(what); }

template <typename T>
T require(const json& node, const char* key, const char* section) {
  if (!node.contains(key)) {
    throw ParseError(std::string("missing field '") + key + "' in " + section);
  }
  try {
    return node.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad value for '") + key + "' in " + section + ": " + e.what());
  }
}

}  // namespace

NoSuchRoute::NoSuchRoute(VertiportId from, VertiportId to)
    : std::out_of_range("no route " + std::to_string(from) + "->" + std::to_string(to)) {}

double VertiportNetwork::max_route_length() const {
  double best = 0.0;
  for (const auto& r : routes) best = std::max(best, r.length_miles);
  return best;
}

std::optional<std::size_t> VertiportNetwork::route_index(VertiportId from, VertiportId to) const {
  for (std::size_t i = 0; i < routes.size(); ++i) {
    if (routes[i].from == from && routes[i].to == to) return i;
  }
  return std::nullopt;
}

double Schedules::max_price() const {
  double best = 0.0;
  for (double p : prices) best = std::max(best, p);
  return best;
}

int Schedules::demand_scale() const {
  int best = 0;
  for (const auto& row : demand) {
    for (int d : row) best = std::max(best, d);
  }
  return best > 0 ? best : 1;
}

void validate(const Scenario& s) {
  const auto& net = s.network;
  const auto& fleet = s.fleet;
  const auto& sched = s.schedules;

  if (net.vertiports < 1) fail("network needs at least one vertiport");
  if (net.pads_per_vertiport < 1) fail("pads per vertiport must be positive");
  if (net.routes.empty()) fail("network has no routes");
  for (std::size_t i = 0; i < net.routes.size(); ++i) {
    const auto& r = net.routes[i];
    if (r.from < 1 || r.from > net.vertiports || r.to < 1 || r.to > net.vertiports) {
      fail(describe(r) + " references a vertiport outside 1.." + std::to_string(net.vertiports));
    }
    if (r.from == r.to) fail(describe(r) + " is a self-loop");
    if (!(r.length_miles > 0.0)) fail(describe(r) + " has non-positive length");
    for (std::size_t j = 0; j < i; ++j) {
      if (net.routes[j].from == r.from && net.routes[j].to == r.to) {
        fail(describe(r) + " is declared twice");
      }
    }
  }

  if (fleet.count < 1) fail("fleet needs at least one eVTOL");
  if (fleet.capacity < 1) fail("passenger capacity must be positive");
  if (!(fleet.battery_kwh > 0.0)) fail("battery capacity must be positive");
  if (!(fleet.cruise_mph > 0.0)) fail("cruise speed must be positive");
  if (!(fleet.range_miles > 0.0)) fail("range must be positive");
  if (!(fleet.discharge_kw > 0.0)) fail("discharge rate must be positive");
  if (static_cast<int>(fleet.initial_locations.size()) != fleet.count) {
    fail("initial_locations has " + std::to_string(fleet.initial_locations.size()) +
         " entries for " + std::to_string(fleet.count) + " eVTOLs");
  }
  if (static_cast<int>(fleet.initial_batteries.size()) != fleet.count) {
    fail("initial_batteries has " + std::to_string(fleet.initial_batteries.size()) +
         " entries for " + std::to_string(fleet.count) + " eVTOLs");
  }
  std::vector<int> occupancy(net.vertiports + 1, 0);
  for (int i = 0; i < fleet.count; ++i) {
    const VertiportId loc = fleet.initial_locations[i];
    if (loc < 1 || loc > net.vertiports) {
      fail("eVTOL " + std::to_string(i + 1) + " starts outside the network");
    }
    const double b = fleet.initial_batteries[i];
    if (!(b > 0.0) || b > fleet.battery_kwh) {
      fail("eVTOL " + std::to_string(i + 1) + " initial battery outside (0, B_max]");
    }
    ++occupancy[loc];
  }
  for (int v = 1; v <= net.vertiports; ++v) {
    if (occupancy[v] > net.pads_per_vertiport) {
      fail("initial pad occupancy exceeds v at vertiport " + std::to_string(v));
    }
  }
  const double longest_hours = net.max_route_length() / fleet.cruise_mph;
  if (fleet.discharge_kw * longest_hours > fleet.battery_kwh + kBatteryTolerance) {
    fail("longest route is not flyable on a full charge");
  }

  if (!(s.econ.fare_per_passenger_mile > 0.0)) fail("fare must be positive");
  if (!(s.econ.cost_per_seat_mile > 0.0)) fail("operating cost must be positive");

  if (sched.steps < 1) fail("episode needs at least one step");
  if (!(sched.step_hours > 0.0)) fail("step duration must be positive");
  if (static_cast<int>(sched.prices.size()) != sched.steps) {
    fail("price schedule has " + std::to_string(sched.prices.size()) + " entries for " +
         std::to_string(sched.steps) + " steps");
  }
  for (double p : sched.prices) {
    if (!(p > 0.0)) fail("electricity prices must be positive");
  }
  if (static_cast<int>(sched.demand.size()) != sched.steps) {
    fail("demand matrix has " + std::to_string(sched.demand.size()) + " rows for " +
         std::to_string(sched.steps) + " steps");
  }
  for (std::size_t t = 0; t < sched.demand.size(); ++t) {
    if (sched.demand[t].size() != net.routes.size()) {
      fail("demand row " + std::to_string(t) + " has " + std::to_string(sched.demand[t].size()) +
           " columns for " + std::to_string(net.routes.size()) + " routes");
    }
    for (int d : sched.demand[t]) {
      if (d < 0) fail("demand entries must be non-negative");
    }
  }
  if (sched.step_hours + kBatteryTolerance < longest_hours) {
    fail("step duration shorter than the longest flight");
  }
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed scenario: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario document must be an object");
  const int version = require<int>(doc, "format", "document");
  if (version != kFormatVersion) {
    throw ParseError("unsupported scenario format " + std::to_string(version));
  }

  Scenario s;
  s.label = doc.value("label", std::string{});

  if (!doc.contains("network")) throw ParseError("missing section 'network'");
  const json& net = doc.at("network");
  s.network.vertiports = require<int>(net, "vertiports", "network");
  s.network.pads_per_vertiport = require<int>(net, "pads_per_vertiport", "network");
  if (!net.contains("routes") || !net.at("routes").is_array()) {
    throw ParseError("network.routes must be an array");
  }
  for (const json& r : net.at("routes")) {
    s.network.routes.push_back(Route{require<int>(r, "from", "route"),
                                     require<int>(r, "to", "route"),
                                     require<double>(r, "length_miles", "route")});
  }

  if (!doc.contains("fleet")) throw ParseError("missing section 'fleet'");
  const json& fleet = doc.at("fleet");
  s.fleet.count = require<int>(fleet, "count", "fleet");
  s.fleet.capacity = require<int>(fleet, "capacity", "fleet");
  s.fleet.battery_kwh = require<double>(fleet, "battery_kwh", "fleet");
  s.fleet.cruise_mph = require<double>(fleet, "cruise_mph", "fleet");
  s.fleet.range_miles = require<double>(fleet, "range_miles", "fleet");
  if (fleet.contains("discharge_kw")) {
    s.fleet.discharge_kw = require<double>(fleet, "discharge_kw", "fleet");
  } else if (s.fleet.battery_kwh > 0 && s.fleet.range_miles > 0 && s.fleet.cruise_mph > 0) {
    s.fleet.discharge_kw = derive_eta(s.fleet.battery_kwh, s.fleet.range_miles, s.fleet.cruise_mph);
  }
  s.fleet.initial_locations = require<std::vector<int>>(fleet, "initial_locations", "fleet");
  if (fleet.contains("initial_batteries")) {
    s.fleet.initial_batteries = require<std::vector<double>>(fleet, "initial_batteries", "fleet");
  } else {
    s.fleet.initial_batteries.assign(std::max(s.fleet.count, 0), s.fleet.battery_kwh);
  }

  if (!doc.contains("economics")) throw ParseError("missing section 'economics'");
  const json& econ = doc.at("economics");
  s.econ.fare_per_passenger_mile = require<double>(econ, "fare_per_passenger_mile", "economics");
  s.econ.cost_per_seat_mile = require<double>(econ, "cost_per_seat_mile", "economics");

  if (!doc.contains("schedule")) throw ParseError("missing section 'schedule'");
  const json& sched = doc.at("schedule");
  s.schedules.steps = require<int>(sched, "steps", "schedule");
  s.schedules.step_hours = require<double>(sched, "step_hours", "schedule");
  s.schedules.prices = require<std::vector<double>>(sched, "prices", "schedule");
  s.schedules.demand = require<std::vector<std::vector<int>>>(sched, "demand", "schedule");

  validate(s);
  return s;
}

std::string format_scenario(const Scenario& s) {
  json doc;
  doc["format"] = kFormatVersion;
  doc["label"] = s.label;
  json routes = json::array();
  for (const auto& r : s.network.routes) {
    routes.push_back({{"from", r.from}, {"to", r.to}, {"length_miles", r.length_miles}});
  }
  doc["network"] = {{"vertiports", s.network.vertiports},
                    {"pads_per_vertiport", s.network.pads_per_vertiport},
                    {"routes", routes}};
  doc["fleet"] = {{"count", s.fleet.count},
                  {"capacity", s.fleet.capacity},
                  {"battery_kwh", s.fleet.battery_kwh},
                  {"cruise_mph", s.fleet.cruise_mph},
                  {"range_miles", s.fleet.range_miles},
                  {"discharge_kw", s.fleet.discharge_kw},
                  {"initial_locations", s.fleet.initial_locations},
                  {"initial_batteries", s.fleet.initial_batteries}};
  doc["economics"] = {{"fare_per_passenger_mile", s.econ.fare_per_passenger_mile},
                      {"cost_per_seat_mile", s.econ.cost_per_seat_mile}};
  doc["schedule"] = {{"steps", s.schedules.steps},
                     {"step_hours", s.schedules.step_hours},
                     {"prices", s.schedules.prices},
                     {"demand", s.schedules.demand}};
  return doc.dump(2) + "\n";
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file " + path.string());
  out << format_scenario(scenario);
}

double derive_eta(double battery_kwh, double range_miles, double cruise_mph) {
  if (!(battery_kwh > 0.0) || !(range_miles > 0.0) || !(cruise_mph > 0.0)) {
    throw std::invalid_argument("derive_eta needs positive inputs");
  }
  return battery_kwh / (range_miles / cruise_mph);
}

DefaultFleet default_fleet(int count) {
  if (count < 1) throw std::invalid_argument("fleet needs at least one eVTOL");
  DefaultFleet out;
  out.fleet.count = count;
  out.fleet.capacity = 4;
  out.fleet.battery_kwh = 140.0;
  out.fleet.cruise_mph = 150.0;
  out.fleet.range_miles = 60.0;
  out.fleet.discharge_kw = derive_eta(140.0, 60.0, 150.0);
  out.fleet.initial_batteries.assign(count, 140.0);
  out.pads_per_vertiport = (count + 1) / 2;
  return out;
}

std::vector<VertiportId> round_robin_locations(int count, int vertiports, int pads_per_vertiport) {
  if (count > vertiports * pads_per_vertiport) {
    throw ValidationError("fleet does not fit on the available pads");
  }
  std::vector<VertiportId> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(i % vertiports + 1);
  return out;
}

}  // namespace evtol
