#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cirsense::nn {

/// Dense (batch, channels, length) array, row-major.
struct Tensor3 {
  int batch = 0;
  int channels = 0;
  int length = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int b, int c, int l, double fill = 0.0)
      : batch(b), channels(c), length(l),
        data(static_cast<std::size_t>(b) * static_cast<std::size_t>(c) * static_cast<std::size_t>(l),
             fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t offset(int b, int c) const {
    return (static_cast<std::size_t>(b) * static_cast<std::size_t>(channels) +
            static_cast<std::size_t>(c)) *
           static_cast<std::size_t>(length);
  }
  double& at(int b, int c, int t) { return data[offset(b, c) + static_cast<std::size_t>(t)]; }
  double at(int b, int c, int t) const { return data[offset(b, c) + static_cast<std::size_t>(t)]; }
  std::span<double> row(int b, int c) {
    return {data.data() + offset(b, c), static_cast<std::size_t>(length)};
  }
  std::span<const double> row(int b, int c) const {
    return {data.data() + offset(b, c), static_cast<std::size_t>(length)};
  }
  /// All channels of one batch item, contiguous.
  std::span<const double> item(int b) const {
    const auto n = static_cast<std::size_t>(channels) * static_cast<std::size_t>(length);
    return {data.data() + static_cast<std::size_t>(b) * n, n};
  }

  bool same_shape(const Tensor3& o) const {
    return batch == o.batch && channels == o.channels && length == o.length;
  }
  bool all_finite() const;
};

/// Gathers items `rows` of `src` into a new batch.
Tensor3 gather(const Tensor3& src, std::span<const std::size_t> rows);
/// Channels [first, first + count) of every item.
Tensor3 slice_channels(const Tensor3& src, int first, int count);

}  // namespace cirsense::nn
