#include "cirsense/nn/optimizer.hpp"

#include <cmath>

namespace cirsense::nn {

Violations OptimizerState::check() const {
  Violations v;
  v.require(learning_rate > 0, "optimizer.learning_rate must be > 0");
  v.require(beta1 > 0 && beta1 < 1, "optimizer.beta1 must be in (0, 1)");
  v.require(beta2 > 0 && beta2 < 1, "optimizer.beta2 must be in (0, 1)");
  v.require(epsilon > 0, "optimizer.epsilon must be > 0");
  return v;
}

void adam_step(OptimizerState& state, std::span<double> params, std::span<const double> gradients) {
  if (params.size() != gradients.size()) throw ShapeError("adam_step: gradient size mismatch");
  if (state.first_moment.empty()) {
    state.first_moment.assign(params.size(), 0.0);
    state.second_moment.assign(params.size(), 0.0);
  }
  if (state.first_moment.size() != params.size()) throw ShapeError("adam_step: moment size mismatch");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = gradients[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    params[i] -= state.learning_rate * (m / c1) / (std::sqrt(v / c2) + state.epsilon);
  }
}

}  // namespace cirsense::nn
