#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "defectbench/error.hpp"

namespace defectbench {

// Adaptive moment estimation. Keeps exponential moving averages of gradients
// and squared gradients with bias correction.
struct AdamState {
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment
  std::uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 0.001;

  explicit AdamState(std::size_t n_params, double lr = 0.001)
      : m(n_params, 0.0), v(n_params, 0.0), learning_rate(lr) {}
};

// One update step, in place:
//   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2
//   params <- params - lr * m_hat / (sqrt(v_hat) + eps)
inline void adam_step(std::vector<double>& params, const std::vector<double>& grads,
                      AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw InvalidInput("adam_step: shape mismatch");
  for (double g : grads)
    if (!std::isfinite(g)) throw InvalidInput("adam_step: non-finite gradient");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace defectbench
