#include "evtol/qnetwork.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "evtol/scenario.hpp"

namespace evtol::dqn {
namespace {

constexpr int kCheckpointFormat = 1;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("network needs input and output sizes");
  for (auto s : sizes) {
    if (s == 0) throw std::invalid_argument("layer width must be positive");
  }
}

}  // namespace

QNetwork::QNetwork(std::vector<std::size_t> layer_sizes, std::uint64_t seed)
    : QNetwork(zeros(std::move(layer_sizes))) {
  std::mt19937_64 rng(seed);
  for (auto& layer : layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    for (double& w : layer.weights) w = (2.0 * unit_uniform(rng) - 1.0) * limit;
  }
}

QNetwork QNetwork::zeros(std::vector<std::size_t> layer_sizes) {
  check_sizes(layer_sizes);
  QNetwork net;
  net.sizes_ = std::move(layer_sizes);
  for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
    DenseLayer layer;
    layer.in = net.sizes_[l];
    layer.out = net.sizes_[l + 1];
    layer.weights.assign(layer.in * layer.out, 0.0);
    layer.bias.assign(layer.out, 0.0);
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

std::vector<double> QNetwork::forward(std::span<const double> observation) const {
  return forward_batch(observation, 1);
}

std::vector<double> QNetwork::forward_batch(std::span<const double> observations,
                                            std::size_t batch) const {
  if (observations.size() != batch * input_size()) {
    throw std::invalid_argument("observation width " + std::to_string(observations.size()) +
                                " does not match network input " +
                                std::to_string(batch * input_size()));
  }
  std::vector<double> current(observations.begin(), observations.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    next.assign(batch * layer.out, 0.0);
    kernels::dense_forward(exec_, layer.weights, layer.bias, current, next, batch, layer.in,
                           layer.out, l + 1 < layers_.size());
    current.swap(next);
  }
  return current;
}

double QNetwork::loss(std::span<const double> observations, std::span<const int> actions,
                      std::span<const double> targets) const {
  const std::size_t batch = actions.size();
  const auto q = forward_batch(observations, batch);
  double sum = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const double diff = q[b * output_size() + actions[b]] - targets[b];
    sum += diff * diff;
  }
  return sum / static_cast<double>(batch);
}

Gradients QNetwork::zero_gradients() const {
  Gradients g;
  for (const auto& layer : layers_) {
    g.weights.emplace_back(layer.weights.size(), 0.0);
    g.bias.emplace_back(layer.bias.size(), 0.0);
  }
  return g;
}

double QNetwork::loss_and_gradient(std::span<const double> observations,
                                   std::span<const int> actions, std::span<const double> targets,
                                   Gradients& grads) const {
  const std::size_t batch = actions.size();
  if (targets.size() != batch) throw std::invalid_argument("targets and actions differ in length");
  if (observations.size() != batch * input_size()) {
    throw std::invalid_argument("observation batch has the wrong width");
  }
  grads = zero_gradients();

  // activations[0] is the input; activations[l + 1] is layer l's output.
  std::vector<std::vector<double>> activations;
  activations.emplace_back(observations.begin(), observations.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    std::vector<double> out(batch * layer.out, 0.0);
    kernels::dense_forward(exec_, layer.weights, layer.bias, activations.back(), out, batch,
                           layer.in, layer.out, l + 1 < layers_.size());
    activations.push_back(std::move(out));
  }

  const std::size_t width = output_size();
  const auto& q = activations.back();
  std::vector<double> delta(batch * width, 0.0);
  double sum = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int a = actions[b];
    if (a < 0 || static_cast<std::size_t>(a) >= width) throw std::out_of_range("action index");
    const double diff = q[b * width + a] - targets[b];
    sum += diff * diff;
    delta[b * width + a] = 2.0 * diff / static_cast<double>(batch);
  }

  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    kernels::dense_weight_grad(exec_, delta, activations[l], grads.weights[l], grads.bias[l],
                               batch, layer.in, layer.out);
    if (l == 0) break;
    std::vector<double> below(batch * layer.in, 0.0);
    kernels::dense_input_grad(exec_, layer.weights, delta, below, batch, layer.in, layer.out);
    const auto& act = activations[l];
    for (std::size_t c = 0; c < below.size(); ++c) {
      if (act[c] <= 0.0) below[c] = 0.0;
    }
    delta.swap(below);
  }
  return sum / static_cast<double>(batch);
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::sgd ? "sgd" : "adam"; }

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, const QNetwork& net)
    : kind_(kind), lr_(learning_rate) {
  if (kind_ == OptimizerKind::adam) {
    m_ = net.zero_gradients();
    v_ = net.zero_gradients();
  }
}

void Optimizer::apply(QNetwork& net, const Gradients& grads) {
  auto& layers = net.layers();
  ++steps_;
  if (kind_ == OptimizerKind::sgd) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      for (std::size_t i = 0; i < layers[l].weights.size(); ++i) {
        layers[l].weights[i] -= lr_ * grads.weights[l][i];
      }
      for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
        layers[l].bias[i] -= lr_ * grads.bias[l][i];
      }
    }
    return;
  }
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(steps_));
  auto update = [&](std::vector<double>& param, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
      v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
      param[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + kAdamEps);
    }
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weights, grads.weights[l], m_.weights[l], v_.weights[l]);
    update(layers[l].bias, grads.bias[l], m_.bias[l], v_.bias[l]);
  }
}

std::string format_checkpoint(const QNetwork& net) {
  nlohmann::json doc;
  doc["format"] = kCheckpointFormat;
  doc["layer_sizes"] = net.layer_sizes();
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    layers.push_back({{"weights", layer.weights}, {"bias", layer.bias}});
  }
  doc["layers"] = layers;
  return doc.dump() + "\n";
}

QNetwork parse_checkpoint(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
    if (doc.at("format").get<int>() != kCheckpointFormat) {
      throw ParseError("unsupported checkpoint format");
    }
    QNetwork net = QNetwork::zeros(doc.at("layer_sizes").get<std::vector<std::size_t>>());
    const auto& layers = doc.at("layers");
    if (layers.size() != net.layers().size()) throw ParseError("checkpoint layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto weights = layers[l].at("weights").get<std::vector<double>>();
      auto bias = layers[l].at("bias").get<std::vector<double>>();
      if (weights.size() != net.layers()[l].weights.size() ||
          bias.size() != net.layers()[l].bias.size()) {
        throw ParseError("checkpoint layer " + std::to_string(l) + " has the wrong shape");
      }
      net.layers()[l].weights = std::move(weights);
      net.layers()[l].bias = std::move(bias);
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const QNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << format_checkpoint(net);
}

QNetwork load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_checkpoint(buffer.str());
}

}  // namespace evtol::dqn
