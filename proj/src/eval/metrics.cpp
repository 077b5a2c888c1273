#include "cirsense/eval/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace cirsense::eval {

double detection_accuracy(std::span<const double> target_probability,
                          std::span<const Hypothesis> labels, double threshold) {
  if (target_probability.size() != labels.size())
    throw ShapeError("detection_accuracy: prediction and label counts differ");
  if (labels.empty()) throw std::invalid_argument("detection_accuracy: empty test set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto decided = target_probability[i] >= threshold ? Hypothesis::kTarget : Hypothesis::kNull;
    correct += decided == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

ErrorStats error_stats(std::vector<double> errors) {
  if (errors.empty()) throw std::invalid_argument("error_stats: no errors");
  std::sort(errors.begin(), errors.end());
  ErrorStats s;
  const double n = static_cast<double>(errors.size());
  s.mean_error_m = std::accumulate(errors.begin(), errors.end(), 0.0) / n;
  s.cdf.reserve(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i)
    s.cdf.emplace_back(errors[i], static_cast<double>(i + 1) / n);
  return s;
}

ErrorStats position_error_stats(std::span<const Point> predicted, std::span<const Point> truth) {
  if (predicted.size() != truth.size())
    throw ShapeError("position_error_stats: prediction and truth counts differ");
  std::vector<double> e(predicted.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = distance(predicted[i], truth[i]);
  return error_stats(std::move(e));
}

double cdf_at(const Cdf& cdf, double x) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), x,
                                   [](double v, const auto& p) { return v < p.first; });
  return it == cdf.begin() ? 0.0 : std::prev(it)->second;
}

}  // namespace cirsense::eval
