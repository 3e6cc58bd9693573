#include "evtol/dqn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "evtol/multi_agent.hpp"
#include "evtol/single_agent.hpp"

namespace evtol::dqn {
namespace {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

TrainConfig resolved(const TrainConfig& config, std::int64_t total_steps) {
  TrainConfig out = config;
  if (out.anneal_steps == 0) out.anneal_steps = std::max<std::int64_t>(1, total_steps * 4 / 5);
  return out;
}

double mean_or_nan(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

}  // namespace

AgentKind parse_agent_kind(const std::string& name) {
  if (name == "single") return AgentKind::single;
  if (name == "multi") return AgentKind::multi;
  throw std::invalid_argument("unknown agent kind '" + name + "'");
}

std::string to_string(AgentKind kind) { return kind == AgentKind::single ? "single" : "multi"; }

TrainConfig TrainConfig::single_agent_defaults() {
  TrainConfig c;
  c.learning_rate = 0.00001;
  c.hidden = {128, 128, 128};
  return c;
}

TrainConfig TrainConfig::multi_agent_defaults() {
  TrainConfig c;
  c.learning_rate = 0.0005;
  c.hidden = {256};
  return c;
}

TrainConfig TrainConfig::defaults_for(AgentKind kind) {
  return kind == AgentKind::single ? single_agent_defaults() : multi_agent_defaults();
}

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
  if (!(0.0 <= epsilon_end && epsilon_end <= epsilon_start && epsilon_start <= 1.0)) {
    throw std::invalid_argument("need 0 <= epsilon_end <= epsilon_start <= 1");
  }
  if (target_sync_interval < 1) throw std::invalid_argument("target sync interval must be >= 1");
  if (minibatch < 1) throw std::invalid_argument("minibatch must be positive");
  if (buffer_capacity < minibatch) throw std::invalid_argument("buffer smaller than minibatch");
  if (episodes < 0) throw std::invalid_argument("episode count must be non-negative");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (anneal_steps < 0) throw std::invalid_argument("anneal span must be non-negative");
}

double epsilon_at(std::int64_t step, const TrainConfig& config) {
  if (config.anneal_steps <= 0 || step >= config.anneal_steps) return config.epsilon_end;
  const double frac = static_cast<double>(step) / static_cast<double>(config.anneal_steps);
  return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac;
}

int masked_argmax(std::span<const double> q, const std::vector<bool>& mask) {
  int best = -1;
  for (std::size_t a = 0; a < q.size(); ++a) {
    if (!mask.empty() && !mask[a]) continue;
    if (best < 0 || q[a] > q[best]) best = static_cast<int>(a);
  }
  if (best < 0) throw std::logic_error("no feasible action");
  return best;
}

int select_action(const QNetwork& net, std::span<const double> observation, double epsilon,
                  const std::vector<bool>& mask, std::mt19937_64& rng) {
  if (unit_uniform(rng) < epsilon) {
    std::vector<int> feasible;
    for (std::size_t a = 0; a < net.output_size(); ++a) {
      if (mask.empty() || mask[a]) feasible.push_back(static_cast<int>(a));
    }
    if (feasible.empty()) throw std::logic_error("no feasible action");
    return feasible[rng() % feasible.size()];
  }
  const auto q = net.forward(observation);
  return masked_argmax(q, mask);
}

std::vector<double> td_targets(std::span<const Transition* const> batch, const QNetwork& target,
                               double gamma) {
  std::vector<double> y(batch.size(), 0.0);
  std::vector<double> next;
  std::vector<std::size_t> live;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    y[b] = batch[b]->reward;
    if (!batch[b]->done) {
      live.push_back(b);
      next.insert(next.end(), batch[b]->next_observation.begin(), batch[b]->next_observation.end());
    }
  }
  if (live.empty()) return y;
  const auto q = target.forward_batch(next, live.size());
  const std::size_t width = target.output_size();
  for (std::size_t j = 0; j < live.size(); ++j) {
    const Transition& tr = *batch[live[j]];
    std::span<const double> row(q.data() + j * width, width);
    y[live[j]] += gamma * row[masked_argmax(row, tr.next_mask)];
  }
  return y;
}

Learner::Learner(QNetwork net, const TrainConfig& config)
    : config_(config),
      net_(std::move(net)),
      target_(net_),
      optimizer_(config.optimizer, config.learning_rate, net_),
      buffer_(config.buffer_capacity),
      rng_(config.seed ^ 0x9e3779b97f4a7c15ULL) {}

std::optional<double> Learner::train_step() {
  if (buffer_.size() < std::max(config_.warmup, config_.minibatch)) return std::nullopt;
  const auto batch = buffer_.sample(config_.minibatch, rng_);
  const auto targets = td_targets(batch, target_, config_.gamma);
  std::vector<double> obs;
  obs.reserve(batch.size() * net_.input_size());
  std::vector<int> actions;
  actions.reserve(batch.size());
  for (const Transition* t : batch) {
    obs.insert(obs.end(), t->observation.begin(), t->observation.end());
    actions.push_back(t->action);
  }
  Gradients grads;
  const double loss = net_.loss_and_gradient(obs, actions, targets, grads);
  optimizer_.apply(net_, grads);
  ++gradient_steps_;
  return loss;
}

std::size_t input_width(AgentKind kind, const Scenario& scenario) {
  return kind == AgentKind::single ? single_observation_size(scenario)
                                   : multi_observation_size(scenario);
}

std::size_t output_width(AgentKind kind, const Scenario& scenario) {
  if (kind == AgentKind::multi) return scenario.network.vertiports + 1;
  return static_cast<std::size_t>(
      joint_action_count(scenario.network.vertiports, scenario.fleet.count));
}

QNetwork make_network(AgentKind kind, const Scenario& scenario, const TrainConfig& config) {
  std::vector<std::size_t> sizes{input_width(kind, scenario)};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(output_width(kind, scenario));
  return QNetwork(sizes, config.seed);
}

TrainResult train_single(const Scenario& scenario, const TrainConfig& base) {
  base.validate();
  const auto started = std::chrono::steady_clock::now();
  const TrainConfig config =
      resolved(base, static_cast<std::int64_t>(base.episodes) * scenario.schedules.steps);
  Learner learner(make_network(AgentKind::single, scenario, config), config);

  TrainResult result;
  Episode episode(scenario);
  std::int64_t step = 0;
  for (int ep = 0; ep < config.episodes; ++ep) {
    episode.reset();
    auto obs = observe_single(episode.state(), scenario);
    auto mask = joint_feasible_mask(episode.state(), scenario);
    double total = 0.0;
    double eps = 0.0;
    std::vector<double> losses;
    while (!episode.done()) {
      eps = epsilon_at(step, config);
      const int a = select_action(learner.net(), obs, eps, mask, learner.rng());
      SingleStep st = step_single(episode, JointAction{a});
      std::vector<bool> next_mask;
      if (!st.done) next_mask = joint_feasible_mask(episode.state(), scenario);
      learner.buffer().push({obs, a, st.reward, st.observation, next_mask, st.done});
      total += st.reward;
      ++step;
      if (auto loss = learner.train_step()) losses.push_back(*loss);
      if (step % config.target_sync_interval == 0) learner.sync_target();
      obs = std::move(st.observation);
      mask = std::move(next_mask);
    }
    result.curve.push_back({ep, total, eps, mean_or_nan(losses)});
  }
  result.buffer_size = learner.buffer().size();
  result.env_steps = step;
  result.gradient_steps = learner.gradient_steps();
  result.net = learner.net();
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

TrainResult train_multi(const Scenario& scenario, const TrainConfig& base) {
  base.validate();
  const auto started = std::chrono::steady_clock::now();
  const TrainConfig config =
      resolved(base, static_cast<std::int64_t>(base.episodes) * scenario.schedules.steps);
  Learner learner(make_network(AgentKind::multi, scenario, config), config);
  const int agents = scenario.fleet.count;

  struct Pending {
    std::vector<double> observation;
    int action = 0;
    double reward = 0.0;
  };

  TrainResult result;
  MultiAgentEnv env(scenario);
  std::int64_t step = 0;
  for (int ep = 0; ep < config.episodes; ++ep) {
    env.reset();
    std::vector<std::optional<Pending>> pending(agents);
    double total = 0.0;
    double eps = 0.0;
    std::vector<double> losses;
    while (!env.done()) {
      eps = epsilon_at(step, config);
      for (int i = 0; i < agents; ++i) {
        auto obs = env.observe_agent(i);
        auto mask = env.feasible(i);
        if (pending[i]) {
          learner.buffer().push(
              {std::move(pending[i]->observation), pending[i]->action, pending[i]->reward, obs,
               mask, false});
        }
        const int a = select_action(learner.net(), obs, eps, mask, learner.rng());
        const AgentStep res = env.step_agent(i, AgentAction{a});
        total += res.reward;
        pending[i] = Pending{std::move(obs), a, res.reward};
      }
      ++step;
      if (auto loss = learner.train_step()) losses.push_back(*loss);
      if (step % config.target_sync_interval == 0) learner.sync_target();
    }
    for (int i = 0; i < agents; ++i) {
      if (!pending[i]) continue;
      learner.buffer().push({std::move(pending[i]->observation), pending[i]->action,
                             pending[i]->reward, env.observe_agent(i), {}, true});
    }
    result.curve.push_back({ep, total, eps, mean_or_nan(losses)});
  }
  result.buffer_size = learner.buffer().size();
  result.env_steps = step;
  result.gradient_steps = learner.gradient_steps();
  result.net = learner.net();
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

TrainResult train(AgentKind kind, const Scenario& scenario, const TrainConfig& config) {
  return kind == AgentKind::single ? train_single(scenario, config)
                                   : train_multi(scenario, config);
}

Evaluation evaluate_policy(const QNetwork& net, AgentKind kind, const Scenario& scenario) {
  Evaluation out;
  if (net.input_size() != input_width(kind, scenario) ||
      net.output_size() != output_width(kind, scenario)) {
    throw std::invalid_argument("network shape does not match scenario and agent kind");
  }
  if (kind == AgentKind::single) {
    Episode episode(scenario);
    while (!episode.done()) {
      const auto obs = observe_single(episode.state(), scenario);
      const auto mask = joint_feasible_mask(episode.state(), scenario);
      step_single(episode, JointAction{masked_argmax(net.forward(obs), mask)});
    }
    out.trace = episode.trace();
  } else {
    MultiAgentEnv env(scenario);
    while (!env.done()) {
      for (int i = 0; i < env.agents(); ++i) {
        const auto obs = env.observe_agent(i);
        env.step_agent(i, AgentAction{masked_argmax(net.forward(obs), env.feasible(i))});
      }
    }
    out.trace = env.episode().trace();
  }
  const auto ret = episode_return(out.trace);
  out.reward = ret.reward;
  out.profit = ret.profit;
  return out;
}

std::string format_curve_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out << "episode,total_reward,epsilon,loss_mean\n";
  for (const auto& p : curve) {
    out << p.episode << ',' << format_double(p.total_reward) << ',' << format_double(p.epsilon)
        << ',' << (std::isnan(p.loss_mean) ? std::string("nan") : format_double(p.loss_mean))
        << "\n";
  }
  return out.str();
}

std::vector<CurvePoint> parse_curve_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<CurvePoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    CurvePoint p;
    std::getline(row, cell, ',');
    p.episode = std::stoi(cell);
    std::getline(row, cell, ',');
    p.total_reward = parse_double(cell);
    std::getline(row, cell, ',');
    p.epsilon = parse_double(cell);
    std::getline(row, cell, ',');
    p.loss_mean = cell == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_double(cell);
    out.push_back(p);
  }
  return out;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write curve " + path.string());
  out << format_curve_csv(curve);
}

}  // namespace evtol::dqn
