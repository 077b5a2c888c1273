#pragma once

#include <span>
#include <vector>

#include "cirsense/nn/tensor.hpp"

namespace cirsense::nn {

// Stateless layer kernels. Weight layouts:
//   conv1d: [out_channels][in_channels][kernel], bias [out_channels]
//   dense:  [out_units][in_features], bias [out_units]
// Backward functions accumulate (+=) into parameter gradients and overwrite
// the input gradient.

int conv1d_output_length(int length, int kernel, int stride, int padding);

/// Cross-correlation: y[o,t] = b[o] + sum_{c,k} w[o,c,k] x[c, t*stride + k - padding].
Tensor3 conv1d_forward(const Tensor3& x, std::span<const double> weights,
                       std::span<const double> bias, int out_channels, int kernel, int stride,
                       int padding);

void conv1d_backward(const Tensor3& x, std::span<const double> weights, const Tensor3& grad_out,
                     int kernel, int stride, int padding, Tensor3& grad_x,
                     std::span<double> grad_weights, std::span<double> grad_bias);

struct PoolResult {
  Tensor3 output;
  /// Input position of each output's maximum (lowest index on ties).
  std::vector<int> argmax;
};

int maxpool_output_length(int length, int size, int stride);
PoolResult maxpool_forward(const Tensor3& x, int size, int stride);
Tensor3 maxpool_backward(const Tensor3& grad_out, std::span<const int> argmax, int input_length);

Tensor3 relu_forward(const Tensor3& x);
/// Gradient passes where the forward input was > 0.
Tensor3 relu_backward(const Tensor3& x, const Tensor3& grad_out);

/// x is (batch, features, 1) or any shape; all of an item's values are the features.
Tensor3 dense_forward(const Tensor3& x, std::span<const double> weights,
                      std::span<const double> bias, int out_units);
void dense_backward(const Tensor3& x, std::span<const double> weights, const Tensor3& grad_out,
                    Tensor3& grad_x, std::span<double> grad_weights, std::span<double> grad_bias);

}  // namespace cirsense::nn
