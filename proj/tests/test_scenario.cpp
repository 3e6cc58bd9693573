#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>

#include "evtol/scenario.hpp"
#include "support.hpp"

using namespace evtol;
using evtol::fixture::round_trip;

namespace {

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

long long total(const std::vector<std::vector<int>>& m) {
  long long s = 0;
  for (const auto& row : m) s = std::accumulate(row.begin(), row.end(), s);
  return s;
}

}  // namespace

TEST(Scenario, LoadsShippedFiles) {
  const Scenario desk = load_scenario(fixture::data_path("scenarios/desk_m3_n2.json"));
  EXPECT_EQ(desk.network.vertiports, 3);
  EXPECT_EQ(desk.fleet.count, 2);
  EXPECT_DOUBLE_EQ(desk.fleet.discharge_kw, 350.0);
  const Scenario bay = load_scenario(fixture::data_path("scenarios/bay_area_m5_n5.json"));
  EXPECT_EQ(bay.network.vertiports, 5);
}

TEST(Scenario, SaveLoadRoundTrip) {
  std::mt19937_64 rng(3);
  const auto dir = std::filesystem::temp_directory_path() / "evtol_scenario_rt";
  std::filesystem::create_directories(dir);
  for (int k = 0; k < 20; ++k) {
    Scenario s = fixture::random_scenario(rng, 4, 3, 6);
    s.label = "case " + std::to_string(k);
    save_scenario(s, dir / "s.json");
    EXPECT_EQ(load_scenario(dir / "s.json"), s);
    EXPECT_EQ(parse_scenario(format_scenario(s)), s);
  }
}

TEST(Scenario, RejectsNegativeLength) {
  const std::string text = replace_once(format_scenario(round_trip()), "20.0", "-5.0");
  EXPECT_THROW(parse_scenario(text), ValidationError);
}

TEST(Scenario, RejectsDemandColumnMismatch) {
  Scenario s = round_trip();
  s.schedules.demand[1].push_back(3);
  EXPECT_THROW(parse_scenario(format_scenario(s)), ValidationError);
}

TEST(Scenario, NamesPadViolation) {
  Scenario s = fixture::complete_graph(3, 2, 2, 1);
  s.fleet.initial_locations = {2, 2};
  try {
    validate(s);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "initial pad occupancy exceeds v at vertiport 2");
  }
}

TEST(Scenario, OtherValidationFailures) {
  Scenario s = round_trip();
  s.fleet.initial_batteries = {150.0};
  EXPECT_THROW(validate(s), ValidationError);
  s = round_trip();
  s.network.routes.push_back({1, 3, 10.0});
  EXPECT_THROW(validate(s), ValidationError);
  s = round_trip();
  s.network.routes[0].length_miles = 70.0;  // beyond rated range
  EXPECT_THROW(validate(s), ValidationError);
  s = round_trip();
  s.schedules.prices = {1.0};
  EXPECT_THROW(validate(s), ValidationError);
  s = round_trip();
  s.schedules.step_hours = 0.1;  // shorter than the 20 mi flight
  EXPECT_THROW(validate(s), ValidationError);
}

TEST(Scenario, MalformedInputIsParseError) {
  EXPECT_THROW(parse_scenario("{ not json"), ParseError);
  EXPECT_THROW(parse_scenario("[]"), ParseError);
  EXPECT_THROW(parse_scenario(R"({"format": 2})"), ParseError);
  const std::string no_fleet = R"({"format": 1, "network": {"vertiports": 2,
      "pads_per_vertiport": 1, "routes": []}})";
  EXPECT_THROW(parse_scenario(no_fleet), ParseError);
}

TEST(Scenario, DeriveEta) {
  EXPECT_DOUBLE_EQ(derive_eta(140, 60, 150), 350.0);
  EXPECT_DOUBLE_EQ(derive_eta(80, 90, 90), 80.0);
  EXPECT_DOUBLE_EQ(derive_eta(1, 2, 1), 0.5);
}

TEST(Scenario, DerivedEtaKeepsLongestRouteFlyable) {
  const double eta = derive_eta(140, 60, 150);
  for (double l : {10.0, 35.0, 59.5, 60.0}) EXPECT_LE(eta * (l / 150.0), 140.0 + 1e-9);
}

TEST(Scenario, DefaultFleetPads) {
  EXPECT_EQ(default_fleet(5).pads_per_vertiport, 3);
  EXPECT_EQ(default_fleet(20).pads_per_vertiport, 10);
  EXPECT_EQ(default_fleet(1).pads_per_vertiport, 1);
  const auto d = default_fleet(4).fleet;
  EXPECT_EQ(d.capacity, 4);
  EXPECT_DOUBLE_EQ(d.battery_kwh, 140.0);
  EXPECT_DOUBLE_EQ(d.cruise_mph, 150.0);
  EXPECT_DOUBLE_EQ(d.range_miles, 60.0);
  EXPECT_EQ(d.initial_batteries, std::vector<double>(4, 140.0));
}

TEST(Demand, DeterministicPerSeed) {
  const auto routes = fixture::complete_graph(3, 1, 1, 1).network.routes;
  EXPECT_EQ(synthesize_demand_block(DemandProfile::high, 6, routes, 42),
            synthesize_demand_block(DemandProfile::high, 6, routes, 42));
  EXPECT_NE(synthesize_demand_block(DemandProfile::high, 6, routes, 42),
            synthesize_demand_block(DemandProfile::high, 6, routes, 43));
}

TEST(Demand, ProfilesAreOrdered) {
  const auto routes = fixture::complete_graph(3, 1, 1, 1).network.routes;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto lo = synthesize_demand_block(DemandProfile::low, 6, routes, seed);
    const auto mid = synthesize_demand_block(DemandProfile::medium, 6, routes, seed);
    const auto hi = synthesize_demand_block(DemandProfile::high, 6, routes, seed);
    EXPECT_LT(total(lo), total(mid));
    EXPECT_LT(total(mid), total(hi));
    for (int t = 0; t < 6; ++t) {
      for (std::size_t r = 0; r < routes.size(); ++r) {
        EXPECT_LT(lo[t][r], mid[t][r]);
        EXPECT_LT(mid[t][r], hi[t][r]);
      }
    }
  }
}

TEST(Demand, ShapeAndSign) {
  const auto routes = fixture::complete_graph(3, 1, 1, 1).network.routes;
  const auto m = synthesize_demand_block(DemandProfile::low, 6, routes, 7);
  ASSERT_EQ(m.size(), 6u);
  for (const auto& row : m) {
    ASSERT_EQ(row.size(), 6u);
    for (int d : row) EXPECT_GE(d, 0);
  }
}

TEST(Demand, ProfileNames) {
  EXPECT_EQ(parse_demand_profile("HDB"), DemandProfile::high);
  EXPECT_EQ(parse_demand_profile("medium"), DemandProfile::medium);
  EXPECT_EQ(to_string(DemandProfile::low), "low");
  EXPECT_THROW(parse_demand_profile("peak"), std::invalid_argument);
}

TEST(Placement, RoundRobinHonoursPads) {
  const auto locs = round_robin_locations(5, 4, 3);
  EXPECT_EQ(locs, (std::vector<VertiportId>{1, 2, 3, 4, 1}));
  const auto tight = round_robin_locations(4, 2, 2);
  EXPECT_EQ(std::count(tight.begin(), tight.end(), 1), 2);
  EXPECT_THROW(round_robin_locations(5, 2, 2), ValidationError);
}
