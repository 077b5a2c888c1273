#include "cirsense/nn/layers.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Core>

#include "cirsense/error.hpp"

namespace cirsense::nn {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

// Range of output positions t with 0 <= t*stride + offset < length.
struct TapRange {
  int begin;
  int end;
};

TapRange valid_outputs(int out_len, int length, int stride, int offset) {
  int begin = 0;
  if (offset < 0) begin = (-offset + stride - 1) / stride;
  int end = out_len;
  if (length - offset <= 0)
    end = 0;
  else
    end = std::min(out_len, (length - offset - 1) / stride + 1);
  return {begin, std::max(begin, end)};
}

// col[c*K + k, b*T + t] = x[b, c, t*stride + k - padding], zero outside.
std::vector<double> im2col(const Tensor3& x, int kernel, int stride, int padding, int out_len) {
  const std::size_t width = static_cast<std::size_t>(x.batch) * out_len;
  std::vector<double> col(static_cast<std::size_t>(x.channels) * kernel * width, 0.0);
  for (int c = 0; c < x.channels; ++c)
    for (int k = 0; k < kernel; ++k) {
      const int off = k - padding;
      const auto r = valid_outputs(out_len, x.length, stride, off);
      double* row = col.data() + (static_cast<std::size_t>(c) * kernel + k) * width;
      for (int b = 0; b < x.batch; ++b) {
        const double* in = x.data.data() + x.offset(b, c);
        double* dst = row + static_cast<std::size_t>(b) * out_len;
        for (int t = r.begin; t < r.end; ++t) dst[t] = in[t * stride + off];
      }
    }
  return col;
}

void col2im_add(const std::vector<double>& col, int kernel, int stride, int padding, int out_len,
                Tensor3& gx) {
  const std::size_t width = static_cast<std::size_t>(gx.batch) * out_len;
  for (int c = 0; c < gx.channels; ++c)
    for (int k = 0; k < kernel; ++k) {
      const int off = k - padding;
      const auto r = valid_outputs(out_len, gx.length, stride, off);
      const double* row = col.data() + (static_cast<std::size_t>(c) * kernel + k) * width;
      for (int b = 0; b < gx.batch; ++b) {
        const double* src = row + static_cast<std::size_t>(b) * out_len;
        double* dst = gx.data.data() + gx.offset(b, c);
        for (int t = r.begin; t < r.end; ++t) dst[t * stride + off] += src[t];
      }
    }
}

}  // namespace

int conv1d_output_length(int length, int kernel, int stride, int padding) {
  if (stride < 1 || kernel < 1) return 0;
  const int span = length + 2 * padding - kernel;
  return span < 0 ? 0 : span / stride + 1;
}

Tensor3 conv1d_forward(const Tensor3& x, std::span<const double> weights,
                       std::span<const double> bias, int out_channels, int kernel, int stride,
                       int padding) {
  const int in_channels = x.channels;
  const int out_len = conv1d_output_length(x.length, kernel, stride, padding);
  if (out_len < 1) throw ShapeError("conv1d: output length < 1");
  if (weights.size() != static_cast<std::size_t>(out_channels * in_channels * kernel) ||
      bias.size() != static_cast<std::size_t>(out_channels))
    throw ShapeError("conv1d: weight shape does not match input channels (" +
                     std::to_string(in_channels) + ")");

  const int rows = in_channels * kernel;
  const int width = x.batch * out_len;
  const std::vector<double> col = im2col(x, kernel, stride, padding, out_len);
  // wide[O, B*T] = W[O, C*K] * col
  std::vector<double> wide(static_cast<std::size_t>(out_channels) * width);
  MatrixMap(wide.data(), out_channels, width).noalias() =
      ConstMatrixMap(weights.data(), out_channels, rows) * ConstMatrixMap(col.data(), rows, width);
  Tensor3 y(x.batch, out_channels, out_len);
  for (int b = 0; b < x.batch; ++b)
    for (int o = 0; o < out_channels; ++o) {
      const double* src = wide.data() + static_cast<std::size_t>(o) * width + static_cast<std::size_t>(b) * out_len;
      double* out = y.data.data() + y.offset(b, o);
      const double bo = bias[static_cast<std::size_t>(o)];
      for (int t = 0; t < out_len; ++t) out[t] = src[t] + bo;
    }
  return y;
}

void conv1d_backward(const Tensor3& x, std::span<const double> weights, const Tensor3& grad_out,
                     int kernel, int stride, int padding, Tensor3& grad_x,
                     std::span<double> grad_weights, std::span<double> grad_bias) {
  const int in_channels = x.channels;
  const int out_channels = grad_out.channels;
  const int out_len = grad_out.length;
  if (grad_out.batch != x.batch ||
      out_len != conv1d_output_length(x.length, kernel, stride, padding) ||
      grad_weights.size() != weights.size() || grad_bias.size() != static_cast<std::size_t>(out_channels))
    throw ShapeError("conv1d_backward: shape mismatch");

  const int rows = in_channels * kernel;
  const int width = x.batch * out_len;
  std::vector<double> wide(static_cast<std::size_t>(out_channels) * width);
  for (int b = 0; b < x.batch; ++b)
    for (int o = 0; o < out_channels; ++o) {
      const double* g = grad_out.data.data() + grad_out.offset(b, o);
      std::copy_n(g, out_len, wide.data() + static_cast<std::size_t>(o) * width + static_cast<std::size_t>(b) * out_len);
    }
  for (int o = 0; o < out_channels; ++o) {
    const double* g = wide.data() + static_cast<std::size_t>(o) * width;
    double gb = 0.0;
#pragma omp simd reduction(+ : gb)
    for (int t = 0; t < width; ++t) gb += g[t];
    grad_bias[static_cast<std::size_t>(o)] += gb;
  }

  std::vector<double> col = im2col(x, kernel, stride, padding, out_len);
  const ConstMatrixMap g(wide.data(), out_channels, width);
  // dW[O, C*K] += g * col^T
  MatrixMap(grad_weights.data(), out_channels, rows).noalias() +=
      g * ConstMatrixMap(col.data(), rows, width).transpose();
  // dcol = W^T * g, reusing the col buffer
  MatrixMap(col.data(), rows, width).noalias() =
      ConstMatrixMap(weights.data(), out_channels, rows).transpose() * g;
  grad_x = Tensor3(x.batch, in_channels, x.length);
  col2im_add(col, kernel, stride, padding, out_len, grad_x);
}

int maxpool_output_length(int length, int size, int stride) {
  if (size < 1 || stride < 1 || length < size) return 0;
  return (length - size) / stride + 1;
}

PoolResult maxpool_forward(const Tensor3& x, int size, int stride) {
  const int out_len = maxpool_output_length(x.length, size, stride);
  if (out_len < 1) throw ShapeError("maxpool: output length < 1");
  PoolResult r{Tensor3(x.batch, x.channels, out_len),
               std::vector<int>(static_cast<std::size_t>(x.batch) * x.channels * out_len)};
  std::size_t idx = 0;
  for (int b = 0; b < x.batch; ++b)
    for (int c = 0; c < x.channels; ++c) {
      const double* in = x.data.data() + x.offset(b, c);
      double* out = r.output.data.data() + r.output.offset(b, c);
      for (int t = 0; t < out_len; ++t, ++idx) {
        const int start = t * stride;
        int best = start;
        for (int j = start + 1; j < start + size; ++j)
          if (in[j] > in[best]) best = j;
        out[t] = in[best];
        r.argmax[idx] = best;
      }
    }
  return r;
}

Tensor3 maxpool_backward(const Tensor3& grad_out, std::span<const int> argmax, int input_length) {
  if (argmax.size() != grad_out.size()) throw ShapeError("maxpool_backward: argmax size");
  Tensor3 gx(grad_out.batch, grad_out.channels, input_length);
  std::size_t idx = 0;
  for (int b = 0; b < grad_out.batch; ++b)
    for (int c = 0; c < grad_out.channels; ++c) {
      const double* g = grad_out.data.data() + grad_out.offset(b, c);
      double* dst = gx.data.data() + gx.offset(b, c);
      for (int t = 0; t < grad_out.length; ++t, ++idx) dst[argmax[idx]] += g[t];
    }
  return gx;
}

Tensor3 relu_forward(const Tensor3& x) {
  Tensor3 y = x;
  for (auto& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor3 relu_backward(const Tensor3& x, const Tensor3& grad_out) {
  if (!x.same_shape(grad_out)) throw ShapeError("relu_backward: shape mismatch");
  Tensor3 g = grad_out;
  for (std::size_t i = 0; i < g.data.size(); ++i)
    if (!(x.data[i] > 0.0)) g.data[i] = 0.0;
  return g;
}

Tensor3 dense_forward(const Tensor3& x, std::span<const double> weights,
                      std::span<const double> bias, int out_units) {
  const std::size_t features = static_cast<std::size_t>(x.channels) * x.length;
  if (weights.size() != features * static_cast<std::size_t>(out_units) ||
      bias.size() != static_cast<std::size_t>(out_units))
    throw ShapeError("dense: weight shape does not match " + std::to_string(features) + " features");
  Tensor3 y(x.batch, out_units, 1);
  for (int b = 0; b < x.batch; ++b)
    std::copy(bias.begin(), bias.end(), y.data.begin() + static_cast<std::ptrdiff_t>(b) * out_units);
  const auto f = static_cast<Eigen::Index>(features);
  // y[B, U] += x[B, F] * W^T
  MatrixMap(y.data.data(), x.batch, out_units).noalias() +=
      ConstMatrixMap(x.data.data(), x.batch, f) * ConstMatrixMap(weights.data(), out_units, f).transpose();
  return y;
}

void dense_backward(const Tensor3& x, std::span<const double> weights, const Tensor3& grad_out,
                    Tensor3& grad_x, std::span<double> grad_weights, std::span<double> grad_bias) {
  const std::size_t features = static_cast<std::size_t>(x.channels) * x.length;
  const int out_units = grad_out.channels;
  if (grad_out.batch != x.batch || grad_weights.size() != weights.size() ||
      weights.size() != features * static_cast<std::size_t>(out_units))
    throw ShapeError("dense_backward: shape mismatch");
  const auto f = static_cast<Eigen::Index>(features);
  const double* g = grad_out.data.data();
  for (int b = 0; b < x.batch; ++b)
    for (int u = 0; u < out_units; ++u)
      grad_bias[static_cast<std::size_t>(u)] += g[static_cast<std::size_t>(b) * out_units + u];
  grad_x = Tensor3(x.batch, x.channels, x.length);
  // dW[U, F] += g^T * x ; dx[B, F] = g * W
  const ConstMatrixMap gm(g, x.batch, out_units);
  MatrixMap(grad_weights.data(), out_units, f).noalias() += gm.transpose() * ConstMatrixMap(x.data.data(), x.batch, f);
  MatrixMap(grad_x.data.data(), x.batch, f).noalias() = gm * ConstMatrixMap(weights.data(), out_units, f);
}

}  // namespace cirsense::nn
