#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cirsense/error.hpp"

namespace cirsense::nn {

/// Adaptive-moment (Adam) state for one flat parameter vector.
struct OptimizerState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;

  Violations check() const;
};

/// One bias-corrected Adam update of `params` in place. Moment buffers are
/// sized on first use.
void adam_step(OptimizerState& state, std::span<double> params, std::span<const double> gradients);

}  // namespace cirsense::nn
