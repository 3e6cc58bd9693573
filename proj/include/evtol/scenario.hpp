#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evtol {

/// Vertiports are numbered 1..M everywhere in the public API.
using VertiportId = int;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoSuchRoute : public std::out_of_range {
 public:
  NoSuchRoute(VertiportId from, VertiportId to);
};

struct Route {
  VertiportId from = 0;
  VertiportId to = 0;
  double length_miles = 0.0;

  bool operator==(const Route&) const = default;
};

struct VertiportNetwork {
  int vertiports = 0;
  int pads_per_vertiport = 0;
  std::vector<Route> routes;

  double max_route_length() const;
  /// Position of (from, to) in `routes`, or nullopt when the pair has no route.
  std::optional<std::size_t> route_index(VertiportId from, VertiportId to) const;

  bool operator==(const VertiportNetwork&) const = default;
};

struct FleetParams {
  int count = 0;
  int capacity = 0;             // passenger seats, pilot excluded
  double battery_kwh = 0.0;     // B_max
  double cruise_mph = 0.0;
  double range_miles = 0.0;
  double discharge_kw = 0.0;    // energy drawn per hour of flight
  std::vector<VertiportId> initial_locations;
  std::vector<double> initial_batteries;

  bool operator==(const FleetParams&) const = default;
};

struct EconParams {
  double fare_per_passenger_mile = 0.0;     // rho
  double cost_per_seat_mile = 0.0;          // rho_o, applied to capacity + pilot seat

  bool operator==(const EconParams&) const = default;
};

struct Schedules {
  int steps = 0;
  double step_hours = 0.0;
  std::vector<std::vector<int>> demand;  // [step][route]
  std::vector<double> prices;            // $/kWh per step

  double max_price() const;
  /// Largest scheduled demand entry, or 1 when every entry is zero.
  int demand_scale() const;

  bool operator==(const Schedules&) const = default;
};

struct Scenario {
  std::string label;
  VertiportNetwork network;
  FleetParams fleet;
  EconParams econ;
  Schedules schedules;

  bool operator==(const Scenario&) const = default;
};

/// Throws ValidationError naming the first violated invariant.
void validate(const Scenario& scenario);

Scenario parse_scenario(const std::string& text);
std::string format_scenario(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Discharge rate that empties a full battery exactly at the end of the rated range.
double derive_eta(double battery_kwh, double range_miles, double cruise_mph);

struct DefaultFleet {
  FleetParams fleet;
  int pads_per_vertiport = 0;
};

/// Archer-class aircraft: four seats, 140 kWh, 150 mph, 60 mi, all batteries full.
/// Initial locations are left empty for the caller to place.
DefaultFleet default_fleet(int count);

inline constexpr double kDefaultFare = 4.0;
inline constexpr double kDefaultSeatCost = 1.0;

enum class DemandProfile { low, medium, high };

DemandProfile parse_demand_profile(const std::string& name);
std::string to_string(DemandProfile profile);

/// Seeded synthetic demand block, one row per step. For a fixed seed every
/// entry of a higher profile is strictly larger than the same entry of a lower one.
std::vector<std::vector<int>> synthesize_demand_block(DemandProfile profile, int steps,
                                                      const std::vector<Route>& routes,
                                                      std::uint64_t seed);

/// Round-robin placement over vertiports 1..M honouring the pad limit.
std::vector<VertiportId> round_robin_locations(int count, int vertiports, int pads_per_vertiport);

}  // namespace evtol
