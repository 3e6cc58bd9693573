#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "evtol/dqn.hpp"
#include "evtol/single_agent.hpp"
#include "support.hpp"

using namespace evtol;
using namespace evtol::dqn;

namespace {

TrainConfig quick(AgentKind kind, int episodes) {
  TrainConfig c = TrainConfig::defaults_for(kind);
  c.episodes = episodes;
  c.seed = 4;
  return c;
}

}  // namespace

TEST(Epsilon, LinearSchedule) {
  TrainConfig c;
  c.anneal_steps = 1000;
  EXPECT_EQ(epsilon_at(0, c), 1.0);
  EXPECT_DOUBLE_EQ(epsilon_at(500, c), 0.51);
  EXPECT_EQ(epsilon_at(1000, c), 0.02);
  EXPECT_EQ(epsilon_at(5000, c), 0.02);
}

TEST(Config, DefaultsAndValidation) {
  const auto s = TrainConfig::single_agent_defaults();
  EXPECT_EQ(s.learning_rate, 0.00001);
  EXPECT_EQ(s.hidden, (std::vector<std::size_t>{128, 128, 128}));
  const auto m = TrainConfig::multi_agent_defaults();
  EXPECT_EQ(m.learning_rate, 0.0005);
  EXPECT_EQ(m.hidden, (std::vector<std::size_t>{256}));
  for (const auto& c : {s, m}) {
    EXPECT_EQ(c.gamma, 0.99);
    EXPECT_EQ(c.buffer_capacity, 50000u);
    EXPECT_EQ(c.minibatch, 32u);
    EXPECT_EQ(c.target_sync_interval, 500);
  }
  TrainConfig bad;
  bad.gamma = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = TrainConfig{};
  bad.epsilon_end = 0.5;
  bad.epsilon_start = 0.2;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = TrainConfig{};
  bad.target_sync_interval = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(TdTargets, Cases) {
  QNetwork target = QNetwork::zeros({2, 3});
  target.layers()[0].bias = {0.5, 2.0, -1.0};
  Transition terminal{{0, 0}, 0, 1.5, {0, 0}, {}, true};
  Transition live{{0, 0}, 1, 0.0, {0, 0}, {}, false};
  Transition masked{{0, 0}, 1, 0.0, {0, 0}, {true, false, true}, false};
  const std::vector<const Transition*> batch{&terminal, &live, &masked};
  const auto y = td_targets(batch, target, 0.99);
  EXPECT_EQ(y[0], 1.5);
  EXPECT_DOUBLE_EQ(y[1], 1.98);
  EXPECT_DOUBLE_EQ(y[2], 0.99 * 0.5);
  const auto y0 = td_targets(batch, target, 0.0);
  EXPECT_EQ(y0, (std::vector<double>{1.5, 0.0, 0.0}));
}

TEST(SelectAction, GreedyTieAndMask) {
  QNetwork flat = QNetwork::zeros({3, 4});
  std::mt19937_64 rng(1);
  const std::vector<double> obs{0.1, 0.2, 0.3};
  EXPECT_EQ(select_action(flat, obs, 0.0, {true, true, true, true}, rng), 0);
  EXPECT_EQ(select_action(flat, obs, 0.0, {false, true, true, true}, rng), 1);
  QNetwork peaked = flat;
  peaked.layers()[0].bias = {0.0, 0.0, 3.0, 1.0};
  EXPECT_EQ(select_action(peaked, obs, 0.0, {true, true, true, true}, rng), 2);
  EXPECT_EQ(select_action(peaked, obs, 0.0, {true, true, false, true}, rng), 3);
}

TEST(SelectAction, ExplorationIsUniformOverMask) {
  const QNetwork net = QNetwork::zeros({1, 5});
  std::mt19937_64 rng(2);
  const std::vector<bool> mask{true, false, true, false, true};
  std::map<int, int> counts;
  for (int k = 0; k < 30000; ++k) ++counts[select_action(net, std::vector<double>{0.0}, 1.0, mask, rng)];
  EXPECT_EQ(counts.size(), 3u);
  for (int a : {0, 2, 4}) EXPECT_NEAR(counts[a] / 30000.0, 1.0 / 3.0, 0.02);
}

TEST(SelectAction, NeverPicksMaskedAction) {
  QNetwork net({3, 8, 6}, 3);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 2000; ++k) {
    std::vector<bool> mask(6, false);
    mask[rng() % 6] = true;
    for (int j = 0; j < 6; ++j) mask[j] = mask[j] || (rng() % 3 == 0);
    const double eps = (rng() % 100) / 100.0;
    const int a = select_action(net, std::vector<double>{0.1, 0.5, 0.9}, eps, mask, rng);
    ASSERT_TRUE(mask[a]);
  }
}

TEST(Replay, EvictsOldestFirst) {
  ReplayBuffer buf(5);
  for (int k = 0; k < 8; ++k) buf.push(Transition{{double(k)}, k, 0.0, {}, {}, false});
  EXPECT_EQ(buf.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(buf.at(i).action, static_cast<int>(i + 3));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto sample = buf.sample(5, rng);
    std::sort(sample.begin(), sample.end());
    EXPECT_EQ(std::unique(sample.begin(), sample.end()), sample.end());
  }
  EXPECT_THROW(buf.sample(6, rng), std::invalid_argument);
  EXPECT_THROW(ReplayBuffer(0), std::invalid_argument);
}

TEST(Learner, WarmupAndSync) {
  TrainConfig c;
  c.warmup = 10;
  c.minibatch = 4;
  Learner learner(QNetwork({2, 4, 3}, 1), c);
  EXPECT_FALSE(learner.net() == QNetwork({2, 4, 3}, 2));
  for (int k = 0; k < 9; ++k) {
    learner.buffer().push(Transition{{0.1, 0.2}, k % 3, 1.0, {0.3, 0.4}, {}, false});
  }
  EXPECT_FALSE(learner.train_step());
  learner.buffer().push(Transition{{0.1, 0.2}, 0, 1.0, {0.3, 0.4}, {}, true});
  const QNetwork before_target = learner.target();
  ASSERT_TRUE(learner.train_step());
  EXPECT_EQ(learner.gradient_steps(), 1);
  EXPECT_EQ(learner.target(), before_target);
  EXPECT_FALSE(learner.net() == learner.target());
  learner.sync_target();
  EXPECT_EQ(learner.net(), learner.target());
  learner.sync_target();
  EXPECT_EQ(learner.net(), learner.target());
}

TEST(Training, SingleEpisodeAccounting) {
  const Scenario s = load_scenario(fixture::data_path("scenarios/desk_m3_n2.json"));
  TrainConfig c = quick(AgentKind::single, 1);
  c.epsilon_end = 1.0;
  const auto single = train_single(s, c);
  EXPECT_EQ(single.curve.size(), 1u);
  EXPECT_EQ(single.buffer_size, static_cast<std::size_t>(s.schedules.steps));
  EXPECT_EQ(single.net.output_size(), 16u);

  c = quick(AgentKind::multi, 1);
  const auto multi = train_multi(s, c);
  EXPECT_EQ(multi.buffer_size, static_cast<std::size_t>(s.schedules.steps * s.fleet.count));
  EXPECT_EQ(multi.net.output_size(), 4u);
}

TEST(Training, ReproducibleCurves) {
  const Scenario s = load_scenario(fixture::data_path("scenarios/desk_m3_n2.json"));
  for (auto kind : {AgentKind::single, AgentKind::multi}) {
    TrainConfig c = quick(kind, 250);
    const auto a = train(kind, s, c);
    const auto b = train(kind, s, c);
    ASSERT_EQ(a.curve.size(), b.curve.size());
    for (std::size_t k = 0; k < a.curve.size(); ++k) {
      EXPECT_EQ(a.curve[k].total_reward, b.curve[k].total_reward);
      EXPECT_EQ(a.curve[k].epsilon, b.curve[k].epsilon);
      EXPECT_TRUE(a.curve[k].loss_mean == b.curve[k].loss_mean ||
                  (std::isnan(a.curve[k].loss_mean) && std::isnan(b.curve[k].loss_mean)));
    }
    EXPECT_EQ(a.net, b.net);
    EXPECT_GT(a.gradient_steps, 0);
  }
}

TEST(Evaluate, WaitPreferringNetEarnsNothing) {
  const Scenario s = fixture::round_trip();
  QNetwork net = QNetwork::zeros({input_width(AgentKind::single, s), 3});
  net.layers()[0].bias = {0.0, 1.0, 0.0};
  const auto ev = evaluate_policy(net, AgentKind::single, s);
  EXPECT_EQ(ev.profit, 0.0);
  EXPECT_EQ(ev.reward, 0.0);
  const auto again = evaluate_policy(net, AgentKind::single, s);
  EXPECT_EQ(again.trace, ev.trace);
}

TEST(Evaluate, FlyingNetTakesRoundTrip) {
  const Scenario s = fixture::round_trip();
  // Observation slot 2 is "at vertiport 1": prefer 2 there and 1 elsewhere.
  QNetwork net = QNetwork::zeros({input_width(AgentKind::single, s), 3});
  auto& w = net.layers()[0].weights;
  const std::size_t in = net.input_size();
  w[2 * in + 2] = 1.0;
  w[1 * in + 3] = 1.0;
  const auto ev = evaluate_policy(net, AgentKind::single, s);
  EXPECT_DOUBLE_EQ(ev.profit, 440.0);
  EXPECT_DOUBLE_EQ(ev.reward, 5.5);
}

TEST(Evaluate, ShapeMismatchRejected) {
  const Scenario s = fixture::round_trip();
  EXPECT_THROW(evaluate_policy(QNetwork({3, 3}, 1), AgentKind::single, s), std::invalid_argument);
}

TEST(Curve, CsvRoundTrip) {
  std::vector<CurvePoint> curve{{0, 1.25, 1.0, std::nan("")}, {1, -0.5, 0.51, 0.0123456789}};
  const auto back = parse_curve_csv(format_curve_csv(curve));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1], curve[1]);
  EXPECT_TRUE(std::isnan(back[0].loss_mean));
  EXPECT_EQ(back[0].total_reward, 1.25);
}

TEST(Widths, SingleVersusMulti) {
  for (int m = 2; m <= 4; ++m) {
    for (int n = 1; n <= 4; ++n) {
      const Scenario s = fixture::complete_graph(m, n, 1, n);
      EXPECT_EQ(output_width(AgentKind::single, s),
                static_cast<std::size_t>(joint_action_count(m, n)));
      EXPECT_EQ(output_width(AgentKind::multi, s), static_cast<std::size_t>(m + 1));
    }
  }
}
