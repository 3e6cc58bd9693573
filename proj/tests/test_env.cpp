#include <gtest/gtest.h>

#include "evtol/env.hpp"
#include "evtol/trace.hpp"
#include "support.hpp"

using namespace evtol;
using evtol::fixture::complete_graph;
using evtol::fixture::round_trip;

namespace {

std::vector<AgentAction> acts(std::initializer_list<int> values) {
  std::vector<AgentAction> out;
  for (int v : values) out.push_back(AgentAction{v});
  return out;
}

}  // namespace

TEST(Reset, StartsFromConfiguredFleet) {
  Scenario s = complete_graph(4, 5, 3, 3);
  s.fleet.initial_locations = {4, 2, 2, 1, 3};
  const SimState st = reset(s);
  EXPECT_EQ(st.t, 0);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(st.evtols[i].location, s.fleet.initial_locations[i]);
    EXPECT_DOUBLE_EQ(st.evtols[i].battery, 140.0);
  }
  EXPECT_EQ(st.remaining_demand, s.schedules.demand[0]);
  EXPECT_DOUBLE_EQ(st.price_now, s.schedules.prices[0]);
  EXPECT_EQ(reset(s), st);
}

TEST(Flight, TimeAndBattery) {
  Scenario s = complete_graph(2, 1, 1, 1, 60.0);
  EXPECT_DOUBLE_EQ(flight_time(1, 2, s), 0.4);
  EXPECT_NEAR(battery_after_flight(140.0, 1, 2, s), 0.0, 1e-12);
  s.network.routes[0].length_miles = 30.0;
  EXPECT_DOUBLE_EQ(battery_after_flight(140.0, 1, 2, s), 70.0);
  s.network.routes[0].length_miles = 150.0;
  s.fleet.cruise_mph = 150.0;
  EXPECT_DOUBLE_EQ(flight_time(1, 2, s), 1.0);

  Scenario partial = round_trip();
  partial.network.routes.pop_back();
  partial.schedules.demand = {{4}, {0}};
  EXPECT_THROW(flight_time(2, 1, partial), NoSuchRoute);
}

TEST(Rewards, RechargeEndpoints) {
  EXPECT_EQ(reward_recharge(140.0, 0.3, 140.0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(reward_recharge(0.0, 0.5, 140.0, 0.5), -1.0);
  EXPECT_DOUBLE_EQ(reward_recharge(70.0, 0.25, 140.0, 0.5), -0.25);
}

TEST(Rewards, TransportValues) {
  const EconParams econ{4.0, 1.0};
  EXPECT_DOUBLE_EQ(reward_transport(4, 50.0, econ, 4, 50.0), 2.75);
  EXPECT_DOUBLE_EQ(reward_transport(1, 30.0, econ, 4, 50.0), -30.0 / (4 * 50.0));
  EXPECT_LT(reward_transport(1, 30.0, econ, 4, 50.0), 0.0);
  EXPECT_DOUBLE_EQ(reward_transport(0, 50.0, econ, 4, 50.0), -1.25);
  // break-even sits between one and two passengers
  EXPECT_GT(reward_transport(2, 50.0, econ, 4, 50.0), 0.0);
}

TEST(Feasible, EmptyBatteryOnlyRechargeOrWait) {
  Scenario s = complete_graph(3, 1, 1, 1);
  SimState st = reset(s);
  st.evtols[0].battery = 0.0;
  const auto occ = pad_occupancy(st, s);
  EXPECT_EQ(feasible_actions(st, 0, occ, s), acts({0, 1}));
}

TEST(Feasible, FullDestinationExcluded) {
  Scenario s = complete_graph(3, 2, 1, 1);
  s.fleet.initial_locations = {1, 2};
  const SimState st = reset(s);
  std::vector<int> committed = pad_occupancy(st, s);
  EXPECT_EQ(feasible_actions(st, 0, committed, s), acts({0, 1, 3}));
  committed[3] = 1;
  EXPECT_EQ(feasible_actions(st, 0, committed, s), acts({0, 1}));
}

TEST(Feasible, CompleteGraphAllOpen) {
  Scenario s = complete_graph(3, 1, 1, 1);
  const SimState st = reset(s);
  EXPECT_EQ(feasible_actions(st, 0, pad_occupancy(st, s), s), acts({0, 1, 2, 3}));
  EXPECT_EQ(feasible_mask(st, 0, pad_occupancy(st, s), s),
            (std::vector<bool>{true, true, true, true}));
}

TEST(Resolve, CapacityCapsPassengers) {
  Scenario s = complete_graph(2, 1, 2, 1);
  s.schedules.demand = {{10, 0}, {3, 1}};
  const auto out = resolve_step(reset(s), acts({2}), s);
  EXPECT_EQ(out.carried[0], 4);
  EXPECT_EQ(out.passengers, (std::vector<int>{4, 0}));
  EXPECT_EQ(out.next.remaining_demand, (std::vector<int>{3, 1}));
  EXPECT_EQ(out.next.evtols[0].location, 2);
}

TEST(Resolve, PriorityAllocation) {
  Scenario s = complete_graph(2, 2, 1, 2);
  s.fleet.initial_locations = {1, 1};
  s.schedules.demand = {{5, 0}};
  const auto out = resolve_step(reset(s), acts({2, 2}), s);
  EXPECT_EQ(out.carried, (std::vector<int>{4, 1}));
  EXPECT_EQ(out.passengers[0], 5);
  const double l_max = s.network.max_route_length();
  EXPECT_DOUBLE_EQ(out.rewards[0], reward_transport(4, 30.0, s.econ, 4, l_max));
  EXPECT_DOUBLE_EQ(out.rewards[1], reward_transport(1, 30.0, s.econ, 4, l_max));
}

TEST(Resolve, LowBatteryDowngradesToWait) {
  Scenario s = complete_graph(2, 1, 1, 1, 40.0);
  s.fleet.initial_batteries = {50.0};  // 40 mi needs 93.3 kWh
  s.schedules.demand = {{4, 0}};
  const auto out = resolve_step(reset(s), acts({2}), s);
  EXPECT_EQ(out.resolved[0], AgentAction::wait_at(1));
  EXPECT_EQ(out.rewards[0], 0.0);
  EXPECT_EQ(out.next.evtols[0], reset(s).evtols[0]);
  EXPECT_EQ(out.passengers[0], 0);
}

TEST(Resolve, FullPadDowngradesLaterArrival) {
  Scenario s = complete_graph(3, 2, 1, 1);
  s.fleet.initial_locations = {1, 2};
  s.schedules.demand.assign(1, std::vector<int>(6, 4));
  const auto out = resolve_step(reset(s), acts({3, 3}), s);
  EXPECT_EQ(out.resolved, acts({3, 2}));
  // departures keep their pad for the step, so a swap is refused
  const auto swap = resolve_step(reset(s), acts({2, 1}), s);
  EXPECT_EQ(swap.resolved, acts({1, 2}));
}

TEST(Resolve, RechargeLandsOnFullCharge) {
  Scenario s = complete_graph(2, 1, 2, 1);
  s.fleet.initial_batteries = {35.0};
  s.schedules.prices = {0.4, 0.1};
  const auto out = resolve_step(reset(s), acts({0}), s);
  EXPECT_EQ(out.next.evtols[0].battery, 140.0);
  EXPECT_DOUBLE_EQ(out.dollars[0].recharge_cost, 105.0 * 0.4);
  EXPECT_DOUBLE_EQ(out.rewards[0], -(105.0 * 0.4) / (140.0 * 0.4));
}

TEST(Resolve, Errors) {
  Scenario s = round_trip();
  SimState st = reset(s);
  EXPECT_THROW(resolve_step(st, acts({1, 1}), s), std::invalid_argument);
  EXPECT_THROW(resolve_step(st, acts({3}), s), std::invalid_argument);
  st.t = 2;
  EXPECT_THROW(resolve_step(st, acts({1}), s), EpisodeFinished);
}

TEST(Resolve, IsPure) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 50; ++k) {
    const Scenario s = fixture::random_scenario(rng, 4, 3, 3);
    const SimState st = reset(s);
    std::vector<AgentAction> a;
    for (int i = 0; i < s.fleet.count; ++i) {
      a.push_back(AgentAction{static_cast<int>(rng() % (s.network.vertiports + 1))});
    }
    const auto x = resolve_step(st, a, s);
    const auto y = resolve_step(st, a, s);
    EXPECT_EQ(x.rewards, y.rewards);
    EXPECT_EQ(x.dollars, y.dollars);
    EXPECT_EQ(x.next, y.next);
  }
}

TEST(EpisodeReturn, AllWaitIsZero) {
  Scenario s = complete_graph(3, 2, 4, 1);
  s.schedules.demand.assign(4, std::vector<int>(6, 3));
  Episode ep(s);
  while (!ep.done()) ep.step(acts({1, 2}));
  const auto r = episode_return(ep.trace());
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_EQ(r.profit, 0.0);
}

TEST(EpisodeReturn, SingleFullFlight) {
  Scenario s = complete_graph(2, 1, 1, 1, 50.0);
  s.schedules.demand = {{4, 0}};
  Episode ep(s);
  ep.step(acts({2}));
  const auto r = episode_return(ep.trace());
  EXPECT_DOUBLE_EQ(r.reward, 2.75);
  EXPECT_DOUBLE_EQ(r.profit, (4 * 4 - 5) * 50.0);
}

TEST(EpisodeReturn, RoundTripInstance) {
  const Scenario s = round_trip();
  Episode ep(s);
  EXPECT_DOUBLE_EQ(ep.step(acts({2})).team_reward(), 2.75);
  EXPECT_DOUBLE_EQ(ep.step(acts({1})).team_reward(), 2.75);
  const auto r = episode_return(ep.trace());
  EXPECT_DOUBLE_EQ(r.reward, 5.5);
  EXPECT_DOUBLE_EQ(r.profit, 440.0);
  EXPECT_THROW(ep.step(acts({2})), EpisodeFinished);
}

TEST(EpisodeReturn, IncompleteTraceRejected) {
  Episode ep(round_trip());
  ep.step(acts({2}));
  EXPECT_THROW(episode_return(ep.trace()), IncompleteTrace);
}

// Random-action walk checking the per-step invariants and identities.
TEST(Invariants, RandomWalks) {
  std::mt19937_64 rng(17);
  int steps = 0;
  while (steps < 20000) {
    const Scenario s = fixture::random_scenario(rng, 4, 4, 6);
    const double b_max = s.fleet.battery_kwh;
    const double e_max = s.schedules.max_price();
    const double l_max = s.network.max_route_length();
    SimState st = reset(s);
    while (st.t < s.schedules.steps) {
      std::vector<AgentAction> a;
      for (int i = 0; i < s.fleet.count; ++i) {
        a.push_back(AgentAction{static_cast<int>(rng() % (s.network.vertiports + 1))});
      }
      const auto out = resolve_step(st, a, s);
      const auto occ = pad_occupancy(out.next, s);
      for (int k = 1; k <= s.network.vertiports; ++k) {
        ASSERT_LE(occ[k], s.network.pads_per_vertiport);
      }
      for (std::size_t r = 0; r < out.passengers.size(); ++r) {
        ASSERT_LE(out.passengers[r], s.schedules.demand[st.t][r]);
      }
      double team = 0.0;
      for (int i = 0; i < s.fleet.count; ++i) {
        const double b = out.next.evtols[i].battery;
        ASSERT_GE(b, 0.0);
        ASSERT_LE(b, b_max);
        ASSERT_LE(out.carried[i], s.fleet.capacity);
        const Dollars& d = out.dollars[i];
        switch (kind_of(out.resolved[i], st.evtols[i].location)) {
          case ActionKind::transport:
            ASSERT_NEAR(d.revenue - d.operating_cost, out.rewards[i] * s.fleet.capacity * l_max,
                        1e-9 * l_max);
            break;
          case ActionKind::recharge:
            ASSERT_EQ(b, b_max);
            ASSERT_NEAR(d.recharge_cost, -out.rewards[i] * b_max * e_max, 1e-9);
            break;
          case ActionKind::wait:
            ASSERT_EQ(out.rewards[i], 0.0);
            break;
        }
        team += out.rewards[i];
      }
      ASSERT_DOUBLE_EQ(out.team_reward(), team);
      st = out.next;
      ++steps;
    }
  }
}
