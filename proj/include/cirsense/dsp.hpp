#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cirsense/sweep.hpp"

namespace cirsense {

/// Channel impulse response: inverse DFT of a sweep. Tap b sits at delay
/// b * bin_spacing_s relative to the lowest swept frequency's phase reference.
struct Cir {
  std::vector<Complex> taps;
  double bin_spacing_s = 0.0;
  int link_id = 0;
};

enum class FeatureMode { kMagnitude, kRealImag };
enum class Normalization { kPerLinkMax, kNone };

std::string_view to_string(FeatureMode m);
std::string_view to_string(Normalization n);
FeatureMode parse_feature_mode(std::string_view s);
Normalization parse_normalization(std::string_view s);

struct FeatureOptions {
  int k_taps = 256;
  FeatureMode mode = FeatureMode::kMagnitude;
  Normalization normalize = Normalization::kPerLinkMax;

  friend bool operator==(const FeatureOptions&, const FeatureOptions&) = default;
};

/// values are laid out [link][channel][tap]; channel_count() = links * channels_per_link.
struct FeatureLayout {
  int num_links = 0;
  int channels_per_link = 1;
  int length = 0;

  int channel_count() const { return num_links * channels_per_link; }
  std::size_t size() const {
    return static_cast<std::size_t>(channel_count()) * static_cast<std::size_t>(length);
  }
  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;
};

struct FeatureVector {
  std::vector<double> values;
  FeatureLayout layout;
  FeatureOptions options;

  std::span<const double> link(int l) const;
};

/// Length-N inverse DFT with 1/N normalization (any N).
Cir cir_from_sweep(const FrequencySweep& sweep);

/// Unnormalized forward DFT; inverse of inverse_dft.
std::vector<Complex> forward_dft(std::span<const Complex> x);
/// (1/N) sum_i x_i exp(+j 2 pi i b / N).
std::vector<Complex> inverse_dft(std::span<const Complex> x);

/// Truncates each CIR to k_taps and encodes it as real channels. Throws
/// ShapeError on mismatched CIR lengths and std::invalid_argument on bad k_taps.
FeatureVector features_from_cirs(std::span<const Cir> cirs, const FeatureOptions& opts);

/// Keeps only the given link positions (in order) of a feature vector.
FeatureVector select_links(const FeatureVector& fv, std::span<const int> link_positions);

}  // namespace cirsense
