#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "evtol/kernels.hpp"

namespace evtol::dqn {

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

/// Feedforward Q-value approximator: ReLU hidden layers, identity output.
class QNetwork {
 public:
  QNetwork() = default;
  /// Uniform init in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  QNetwork(std::vector<std::size_t> layer_sizes, std::uint64_t seed);
  static QNetwork zeros(std::vector<std::size_t> layer_sizes);

  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  void set_exec(kernels::Exec exec) { exec_ = exec; }
  kernels::Exec exec() const { return exec_; }

  std::vector<double> forward(std::span<const double> observation) const;
  /// Row-major batch x output Q-values.
  std::vector<double> forward_batch(std::span<const double> observations, std::size_t batch) const;

  /// Mean over the batch of (Q(s_b)[a_b] - y_b)^2.
  double loss(std::span<const double> observations, std::span<const int> actions,
              std::span<const double> targets) const;
  /// Same loss, plus its gradient with respect to every weight and bias.
  double loss_and_gradient(std::span<const double> observations, std::span<const int> actions,
                           std::span<const double> targets, Gradients& grads) const;

  Gradients zero_gradients() const;

  bool operator==(const QNetwork& other) const { return sizes_ == other.sizes_ && layers_ == other.layers_; }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<DenseLayer> layers_;
  kernels::Exec exec_ = kernels::Exec::parallel;
};

enum class OptimizerKind { sgd, adam };

OptimizerKind parse_optimizer_kind(const std::string& name);
std::string to_string(OptimizerKind kind);

/// First-order optimizer state bound to one network shape.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, double learning_rate, const QNetwork& net);

  void apply(QNetwork& net, const Gradients& grads);
  OptimizerKind kind() const { return kind_; }

 private:
  OptimizerKind kind_ = OptimizerKind::sgd;
  double lr_ = 0.0;
  std::int64_t steps_ = 0;
  Gradients m_;
  Gradients v_;
};

void save_checkpoint(const QNetwork& net, const std::filesystem::path& path);
QNetwork load_checkpoint(const std::filesystem::path& path);
std::string format_checkpoint(const QNetwork& net);
QNetwork parse_checkpoint(const std::string& text);

}  // namespace evtol::dqn
