#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "evtol/qnetwork.hpp"
#include "evtol/replay.hpp"
#include "evtol/trace.hpp"

namespace evtol::dqn {

enum class AgentKind { single, multi };

AgentKind parse_agent_kind(const std::string& name);
std::string to_string(AgentKind kind);

struct TrainConfig {
  double learning_rate = 0.0005;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.02;
  /// Steps over which epsilon decays; 0 means 80% of the run's total steps.
  std::int64_t anneal_steps = 0;
  std::int64_t target_sync_interval = 500;
  std::size_t minibatch = 32;
  std::size_t buffer_capacity = 50000;
  std::size_t warmup = 1000;
  int episodes = 1000;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden = {256};
  OptimizerKind optimizer = OptimizerKind::adam;

  /// Table-2 style settings for each agent kind.
  static TrainConfig single_agent_defaults();
  static TrainConfig multi_agent_defaults();
  static TrainConfig defaults_for(AgentKind kind);

  void validate() const;
};

/// Linear decay from epsilon_start at step 0 to epsilon_end at anneal_steps, flat after.
double epsilon_at(std::int64_t step, const TrainConfig& config);

/// Epsilon-greedy over the feasible actions: uniform with probability
/// epsilon, else the feasible argmax with ties to the lowest index.
int select_action(const QNetwork& net, std::span<const double> observation, double epsilon,
                  const std::vector<bool>& mask, std::mt19937_64& rng);

/// Feasible argmax of a Q-vector, ties to the lowest index.
int masked_argmax(std::span<const double> q, const std::vector<bool>& mask);

/// y = r for terminal transitions, else r + gamma * max over next feasible actions of Q_target.
std::vector<double> td_targets(std::span<const Transition* const> batch, const QNetwork& target,
                               double gamma);

/// Network, target copy, optimizer state, replay memory and RNG of one run.
class Learner {
 public:
  Learner(QNetwork net, const TrainConfig& config);

  QNetwork& net() { return net_; }
  const QNetwork& net() const { return net_; }
  const QNetwork& target() const { return target_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::mt19937_64& rng() { return rng_; }
  std::int64_t gradient_steps() const { return gradient_steps_; }

  /// One gradient step on a sampled minibatch. Returns the pre-update loss, or
  /// nullopt while the buffer is below max(warmup, minibatch).
  std::optional<double> train_step();
  void sync_target() { target_ = net_; }

 private:
  TrainConfig config_;
  QNetwork net_;
  QNetwork target_;
  Optimizer optimizer_;
  ReplayBuffer buffer_;
  std::mt19937_64 rng_;
  std::int64_t gradient_steps_ = 0;
};

struct CurvePoint {
  int episode = 0;
  double total_reward = 0.0;
  double epsilon = 0.0;
  double loss_mean = 0.0;  // NaN when no update happened in the episode

  bool operator==(const CurvePoint&) const = default;
};

struct TrainResult {
  QNetwork net;
  std::vector<CurvePoint> curve;
  std::size_t buffer_size = 0;
  std::int64_t env_steps = 0;
  std::int64_t gradient_steps = 0;
  double seconds = 0.0;
};

TrainResult train_single(const Scenario& scenario, const TrainConfig& config);
TrainResult train_multi(const Scenario& scenario, const TrainConfig& config);
TrainResult train(AgentKind kind, const Scenario& scenario, const TrainConfig& config);

std::size_t input_width(AgentKind kind, const Scenario& scenario);
std::size_t output_width(AgentKind kind, const Scenario& scenario);
QNetwork make_network(AgentKind kind, const Scenario& scenario, const TrainConfig& config);

struct Evaluation {
  EpisodeTrace trace;
  double reward = 0.0;
  double profit = 0.0;
};

/// Greedy (epsilon = 0) rollout with feasibility masking.
Evaluation evaluate_policy(const QNetwork& net, AgentKind kind, const Scenario& scenario);

std::string format_curve_csv(const std::vector<CurvePoint>& curve);
std::vector<CurvePoint> parse_curve_csv(const std::string& text);
void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path);

}  // namespace evtol::dqn
