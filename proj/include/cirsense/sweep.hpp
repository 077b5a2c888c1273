#pragma once

#include <complex>
#include <vector>

#include "cirsense/error.hpp"

namespace cirsense {

using Complex = std::complex<double>;

/// Stepped-frequency sweep parameters of the channel sounder.
struct SweepConfig {
  double center_frequency_hz = 28e9;
  double bandwidth_hz = 1e9;
  int num_points = 1001;
  /// Std of the complex per-sample noise (linear, both components together).
  double noise_std = 0.0;
  /// Residual receiver-chain delay added to every path.
  double calibration_delay_s = 0.0;

  Violations check() const;
  void validate() const { check().throw_if_any(); }

  /// Inclusive symmetric grid f_i = Fc - B/2 + i * B/(N-1), i = 0..N-1.
  double frequency(int i) const;
  std::vector<double> frequencies() const;
  double frequency_step_hz() const { return bandwidth_hz / (num_points - 1); }

  /// Delay spacing of inverse-DFT taps, 1/(N * df). Equals (N-1)/(N*B), which is ~1/B.
  double bin_spacing_s() const { return 1.0 / (num_points * frequency_step_hz()); }

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

/// Complex channel samples of one Tx->Rx link across the swept grid.
struct FrequencySweep {
  std::vector<Complex> samples;
  SweepConfig config;
  int link_id = 0;
};

}  // namespace cirsense
