#include "evtol/kernels.hpp"

#include <algorithm>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace evtol::kernels {
namespace {

// Below this many multiply-adds the fork/join costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

inline double forward_cell(const double* wrow, const double* xrow, double bias, std::size_t in,
                           bool relu) {
  // four independent partial sums so the loop vectorizes
  double part[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= in; i += 4) {
    for (std::size_t k = 0; k < 4; ++k) part[k] += wrow[i + k] * xrow[i + k];
  }
  double acc = bias + ((part[0] + part[1]) + (part[2] + part[3]));
  for (; i < in; ++i) acc += wrow[i] * xrow[i];
  return relu && acc < 0.0 ? 0.0 : acc;
}

namespace serial {

void forward(const double* w, const double* bias, const double* x, double* y, std::size_t batch,
             std::size_t in, std::size_t out, bool relu) {
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out; ++o) {
      y[b * out + o] = forward_cell(w + o * in, x + b * in, bias[o], in, relu);
    }
  }
}

void weight_grad(const double* delta, const double* x, double* dw, double* db, std::size_t batch,
                 std::size_t in, std::size_t out) {
  for (std::size_t o = 0; o < out; ++o) {
    double* row = dw + o * in;
    for (std::size_t b = 0; b < batch; ++b) {
      const double d = delta[b * out + o];
      if (d == 0.0) continue;
      const double* xrow = x + b * in;
      for (std::size_t i = 0; i < in; ++i) row[i] += d * xrow[i];
      db[o] += d;
    }
  }
}

void input_grad(const double* w, const double* delta, double* dx, std::size_t batch,
                std::size_t in, std::size_t out) {
  for (std::size_t b = 0; b < batch; ++b) {
    double* row = dx + b * in;
    std::fill(row, row + in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[b * out + o];
      if (d == 0.0) continue;
      const double* wrow = w + o * in;
      for (std::size_t i = 0; i < in; ++i) row[i] += wrow[i] * d;
    }
  }
}

}  // namespace serial

namespace parallel {

void forward(const double* w, const double* bias, const double* x, double* y, std::size_t batch,
             std::size_t in, std::size_t out, bool relu) {
  const auto cells = static_cast<std::int64_t>(batch * out);
  const bool worth = batch * out * in >= kParallelWork;
#pragma omp parallel for schedule(static) if (worth)
  for (std::int64_t c = 0; c < cells; ++c) {
    const std::size_t b = static_cast<std::size_t>(c) / out;
    const std::size_t o = static_cast<std::size_t>(c) % out;
    y[c] = forward_cell(w + o * in, x + b * in, bias[o], in, relu);
  }
}

void weight_grad(const double* delta, const double* x, double* dw, double* db, std::size_t batch,
                 std::size_t in, std::size_t out) {
  const auto rows = static_cast<std::int64_t>(out);
  const bool worth = batch * out * in >= kParallelWork;
#pragma omp parallel for schedule(static) if (worth)
  for (std::int64_t o = 0; o < rows; ++o) {
    double* row = dw + o * in;
    for (std::size_t b = 0; b < batch; ++b) {
      const double d = delta[b * out + o];
      if (d == 0.0) continue;
      const double* xrow = x + b * in;
      for (std::size_t i = 0; i < in; ++i) row[i] += d * xrow[i];
      db[o] += d;
    }
  }
}

void input_grad(const double* w, const double* delta, double* dx, std::size_t batch,
                std::size_t in, std::size_t out) {
  const auto rows = static_cast<std::int64_t>(batch);
  const bool worth = batch * out * in >= kParallelWork;
#pragma omp parallel for schedule(static) if (worth)
  for (std::int64_t b = 0; b < rows; ++b) {
    double* row = dx + b * in;
    std::fill(row, row + in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[b * out + o];
      if (d == 0.0) continue;
      const double* wrow = w + o * in;
      for (std::size_t i = 0; i < in; ++i) row[i] += wrow[i] * d;
    }
  }
}

}  // namespace parallel
}  // namespace

void dense_forward(Exec exec, std::span<const double> w, std::span<const double> bias,
                   std::span<const double> x, std::span<double> y, std::size_t batch,
                   std::size_t in, std::size_t out, bool relu) {
  if (exec == Exec::parallel) {
    parallel::forward(w.data(), bias.data(), x.data(), y.data(), batch, in, out, relu);
  } else {
    serial::forward(w.data(), bias.data(), x.data(), y.data(), batch, in, out, relu);
  }
}

void dense_weight_grad(Exec exec, std::span<const double> delta, std::span<const double> x,
                       std::span<double> dw, std::span<double> db, std::size_t batch,
                       std::size_t in, std::size_t out) {
  if (exec == Exec::parallel) {
    parallel::weight_grad(delta.data(), x.data(), dw.data(), db.data(), batch, in, out);
  } else {
    serial::weight_grad(delta.data(), x.data(), dw.data(), db.data(), batch, in, out);
  }
}

void dense_input_grad(Exec exec, std::span<const double> w, std::span<const double> delta,
                      std::span<double> dx, std::size_t batch, std::size_t in, std::size_t out) {
  if (exec == Exec::parallel) {
    parallel::input_grad(w.data(), delta.data(), dx.data(), batch, in, out);
  } else {
    serial::input_grad(w.data(), delta.data(), dx.data(), batch, in, out);
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace evtol::kernels
