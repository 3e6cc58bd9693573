#include <gtest/gtest.h>

#include <filesystem>

#include "evtol/trace.hpp"
#include "support.hpp"

using namespace evtol;

namespace {

EpisodeTrace random_trace(std::mt19937_64& rng, Scenario& s) {
  s = fixture::random_scenario(rng, 4, 3, 6);
  Episode ep(s);
  while (!ep.done()) {
    std::vector<AgentAction> a;
    for (int i = 0; i < s.fleet.count; ++i) {
      a.push_back(AgentAction{static_cast<int>(rng() % (s.network.vertiports + 1))});
    }
    ep.step(a);
  }
  return ep.trace();
}

}  // namespace

TEST(Trace, DoubleTextRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng) / 3.0;
    EXPECT_EQ(parse_double(format_double(x)), x);
  }
  EXPECT_EQ(parse_double(format_double(1.4210854715202004e-14)), 1.4210854715202004e-14);
  EXPECT_THROW(parse_double("12abc"), ParseError);
}

TEST(Trace, CsvRoundTripIsBitExact) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 30; ++k) {
    Scenario s;
    const EpisodeTrace trace = random_trace(rng, s);
    const EpisodeTrace back = parse_trace_csv(format_trace_csv(trace));
    EXPECT_EQ(back, trace);
    const auto a = episode_return(trace);
    const auto b = episode_return(back);
    EXPECT_EQ(a.reward, b.reward);
    EXPECT_EQ(a.profit, b.profit);
  }
}

TEST(Trace, FileRoundTrip) {
  std::mt19937_64 rng(6);
  Scenario s;
  const EpisodeTrace trace = random_trace(rng, s);
  const auto path = std::filesystem::temp_directory_path() / "evtol_trace_rt.csv";
  write_trace_csv(trace, path);
  EXPECT_EQ(read_trace_csv(path), trace);
}

TEST(Trace, ReplayReproduces) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    Scenario s;
    const EpisodeTrace trace = random_trace(rng, s);
    EXPECT_EQ(replay(trace, s), trace);
  }
}

TEST(Trace, RejectsGarbage) {
  EXPECT_THROW(parse_trace_csv("t,location_1\n0,1\n"), ParseError);
  Scenario s;
  std::mt19937_64 rng(8);
  std::string text = format_trace_csv(random_trace(rng, s));
  text.resize(text.size() - 3);
  EXPECT_ANY_THROW(parse_trace_csv(text));
}

TEST(Trace, StepRecordsStateBeforeAction) {
  const Scenario s = fixture::round_trip();
  Episode ep(s);
  ep.step(std::vector<AgentAction>{AgentAction{2}});
  const TraceStep& step = ep.trace().steps[0];
  EXPECT_EQ(step.t, 0);
  EXPECT_EQ(step.fleet[0].location, 1);
  EXPECT_EQ(step.actions[0].value, 2);
  EXPECT_EQ(step.passengers, (std::vector<int>{4, 0}));
  EXPECT_DOUBLE_EQ(step.dollars.profit(), 220.0);
}
