#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "evtol/scenario.hpp"

namespace evtol::fixture {

inline std::string data_path(const std::string& rel) { return std::string(EVTOL_DATA_DIR) + "/" + rel; }

/// Two vertiports 20 mi apart, one eVTOL, four passengers each way.
inline Scenario round_trip() {
  Scenario s;
  s.label = "round-trip";
  s.network.vertiports = 2;
  s.network.pads_per_vertiport = 1;
  s.network.routes = {{1, 2, 20.0}, {2, 1, 20.0}};
  auto d = default_fleet(1);
  s.fleet = d.fleet;
  s.fleet.initial_locations = {1};
  s.econ = {kDefaultFare, kDefaultSeatCost};
  s.schedules.steps = 2;
  s.schedules.step_hours = 0.25;
  s.schedules.prices = {5.0, 5.0};
  s.schedules.demand = {{4, 0}, {0, 4}};
  return s;
}

/// Complete directed graph on M vertiports with the default fleet.
inline Scenario complete_graph(int m, int n_evtols, int steps, int pads, double length = 30.0) {
  Scenario s;
  s.label = "complete";
  s.network.vertiports = m;
  s.network.pads_per_vertiport = pads;
  for (int j = 1; j <= m; ++j)
    for (int k = 1; k <= m; ++k)
      if (j != k) s.network.routes.push_back({j, k, length});
  s.fleet = default_fleet(n_evtols).fleet;
  s.fleet.initial_locations = round_robin_locations(n_evtols, m, pads);
  s.econ = {kDefaultFare, kDefaultSeatCost};
  s.schedules.steps = steps;
  s.schedules.step_hours = 0.5;
  s.schedules.prices.assign(steps, 0.2);
  s.schedules.demand.assign(steps, std::vector<int>(s.network.routes.size(), 0));
  return s;
}

/// Random valid scenario: random route subset and lengths, partial batteries,
/// pads between 1 and N, random demand and prices.
inline Scenario random_scenario(std::mt19937_64& rng, int max_m, int max_n, int max_steps) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Scenario s;
  s.label = "random";
  const int m = pick(2, max_m);
  const int n = pick(1, max_n);
  s.network.vertiports = m;
  s.network.pads_per_vertiport = std::max(pick(1, n), (n + m - 1) / m);
  for (int j = 1; j <= m; ++j)
    for (int k = 1; k <= m; ++k)
      if (j != k && pick(0, 3) > 0) s.network.routes.push_back({j, k, 5.0 * pick(2, 12)});
  if (s.network.routes.empty()) s.network.routes.push_back({1, 2, 30.0});
  s.fleet = default_fleet(n).fleet;
  s.fleet.capacity = pick(2, 4);
  s.fleet.initial_locations.clear();
  std::vector<int> used(m + 1, 0);
  for (int i = 0; i < n; ++i) {
    int loc = pick(1, m);
    while (used[loc] >= s.network.pads_per_vertiport) loc = loc % m + 1;
    ++used[loc];
    s.fleet.initial_locations.push_back(loc);
    s.fleet.initial_batteries[i] = s.fleet.battery_kwh * pick(2, 4) / 4.0;
  }
  s.econ = {kDefaultFare, kDefaultSeatCost};
  s.schedules.steps = pick(1, max_steps);
  s.schedules.step_hours = 0.5;
  for (int t = 0; t < s.schedules.steps; ++t) {
    s.schedules.prices.push_back(0.05 * pick(2, 10));
    std::vector<int> row;
    for (std::size_t r = 0; r < s.network.routes.size(); ++r) row.push_back(pick(0, 6));
    s.schedules.demand.push_back(row);
  }
  validate(s);
  return s;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace evtol::fixture
