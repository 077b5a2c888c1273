#include "cirsense/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cirsense::nn {

bool Tensor3::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

Tensor3 gather(const Tensor3& src, std::span<const std::size_t> rows) {
  Tensor3 out(static_cast<int>(rows.size()), src.channels, src.length);
  const auto per_item = static_cast<std::size_t>(src.channels) * static_cast<std::size_t>(src.length);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= static_cast<std::size_t>(src.batch)) throw std::out_of_range("gather: row");
    std::copy_n(src.data.begin() + static_cast<std::ptrdiff_t>(rows[i] * per_item), per_item,
                out.data.begin() + static_cast<std::ptrdiff_t>(i * per_item));
  }
  return out;
}

Tensor3 slice_channels(const Tensor3& src, int first, int count) {
  if (first < 0 || count < 0 || first + count > src.channels)
    throw std::out_of_range("slice_channels: channel range");
  Tensor3 out(src.batch, count, src.length);
  for (int b = 0; b < src.batch; ++b)
    for (int c = 0; c < count; ++c) {
      const auto in = src.row(b, first + c);
      std::copy(in.begin(), in.end(), out.row(b, c).begin());
    }
  return out;
}

}  // namespace cirsense::nn
