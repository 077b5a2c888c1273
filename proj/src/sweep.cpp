#include "cirsense/sweep.hpp"

#include <cmath>

namespace cirsense {

Violations SweepConfig::check() const {
  Violations v;
  v.require(num_points >= 2, "sweep.num_points must be >= 2");
  v.require(std::isfinite(bandwidth_hz) && bandwidth_hz > 0, "sweep.bandwidth_hz must be > 0");
  v.require(std::isfinite(center_frequency_hz) && center_frequency_hz > bandwidth_hz / 2,
            "sweep.center_frequency_hz must exceed bandwidth_hz/2");
  v.require(std::isfinite(noise_std) && noise_std >= 0, "sweep.noise_std must be >= 0");
  v.require(std::isfinite(calibration_delay_s), "sweep.calibration_delay_s must be finite");
  return v;
}

double SweepConfig::frequency(int i) const {
  return center_frequency_hz - bandwidth_hz / 2 + i * frequency_step_hz();
}

std::vector<double> SweepConfig::frequencies() const {
  std::vector<double> f(static_cast<std::size_t>(num_points));
  for (int i = 0; i < num_points; ++i) f[static_cast<std::size_t>(i)] = frequency(i);
  return f;
}

}  // namespace cirsense
