#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cirsense/dataset.hpp"

namespace cirsense::eval {

inline constexpr double kDetectionThreshold = 0.5;

/// Fraction of items whose decision (probability >= threshold means target)
/// matches the label.
double detection_accuracy(std::span<const double> target_probability,
                          std::span<const Hypothesis> labels,
                          double threshold = kDetectionThreshold);

/// (error_m, cumulative fraction) at each sorted error; one point per sample.
using Cdf = std::vector<std::pair<double, double>>;

struct ErrorStats {
  double mean_error_m = 0.0;
  Cdf cdf;
};

ErrorStats error_stats(std::vector<double> errors);
ErrorStats position_error_stats(std::span<const Point> predicted, std::span<const Point> truth);

/// Empirical CDF value at x (fraction of errors <= x).
double cdf_at(const Cdf& cdf, double x);

}  // namespace cirsense::eval
