#pragma once

#include <cstddef>
#include <span>

// Dense-layer kernels used by the Q-network. Every kernel has a serial
// reference and an OpenMP version; both accumulate each output element in the
// same order, so their results are bit-identical for any thread count.
namespace evtol::kernels {

enum class Exec { serial, parallel };

/// y[b][o] = act(bias[o] + sum_i w[o][i] * x[b][i]), row-major, act = ReLU or identity.
void dense_forward(Exec exec, std::span<const double> w, std::span<const double> bias,
                   std::span<const double> x, std::span<double> y, std::size_t batch,
                   std::size_t in, std::size_t out, bool relu);

/// dw[o][i] += sum_b delta[b][o] * x[b][i];  db[o] += sum_b delta[b][o]
void dense_weight_grad(Exec exec, std::span<const double> delta, std::span<const double> x,
                       std::span<double> dw, std::span<double> db, std::size_t batch,
                       std::size_t in, std::size_t out);

/// dx[b][i] = sum_o w[o][i] * delta[b][o]
void dense_input_grad(Exec exec, std::span<const double> w, std::span<const double> delta,
                      std::span<double> dx, std::size_t batch, std::size_t in, std::size_t out);

/// Number of OpenMP threads the parallel kernels would use.
int max_threads();

}  // namespace evtol::kernels
