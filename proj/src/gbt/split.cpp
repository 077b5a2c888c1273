#include <algorithm>
#include <cmath>
#include <numeric>

#include "cirsense/gbt/tree.hpp"

namespace cirsense::gbt {

namespace {

double score(double g, double h, double lambda) {
  const double d = h + lambda;
  return d > 0.0 ? g * g / d : 0.0;
}

}  // namespace

// Shared by propose_candidates and the tree builder: values must be sorted
// ascending with their hessians alongside.
std::vector<double> candidates_from_sorted(std::span<const double> values,
                                           std::span<const double> hessians, int n_candidates) {
  std::vector<double> distinct;
  std::vector<double> cumulative;  // hessian mass of values <= distinct[j]
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    total += hessians[i];
    if (distinct.empty() || values[i] != distinct.back()) {
      distinct.push_back(values[i]);
      cumulative.push_back(total);
    } else {
      cumulative.back() = total;
    }
  }
  std::vector<double> out;
  if (distinct.size() < 2 || n_candidates < 1) return out;

  auto midpoint = [&](std::size_t j) {
    const double a = distinct[j];
    const double b = distinct[j + 1];
    const double m = a + (b - a) / 2;
    return m > a ? m : b;
  };

  const std::size_t gaps = distinct.size() - 1;
  if (gaps <= static_cast<std::size_t>(n_candidates)) {
    out.reserve(gaps);
    for (std::size_t j = 0; j < gaps; ++j) out.push_back(midpoint(j));
    return out;
  }

  std::size_t last = gaps;
  for (int k = 1; k <= n_candidates; ++k) {
    const double target = total * k / (n_candidates + 1);
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), target);
    auto j = static_cast<std::size_t>(it - cumulative.begin());
    if (j >= gaps) j = gaps - 1;
    if (j != last) {
      out.push_back(midpoint(j));
      last = j;
    }
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> propose_candidates(std::span<const double> column,
                                       std::span<const double> hessians, int n_candidates) {
  std::vector<std::size_t> order;
  order.reserve(column.size());
  for (std::size_t i = 0; i < column.size(); ++i)
    if (!std::isnan(column[i]) && hessians[i] > 0.0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::vector<double> v(order.size()), h(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    v[i] = column[order[i]];
    h[i] = hessians[order[i]];
  }
  return candidates_from_sorted(v, h, n_candidates);
}

std::optional<Split> scan_buckets(std::span<const GradStats> buckets, const GradStats& missing,
                                  std::span<const double> candidates, double lambda, double gamma) {
  GradStats total = missing;
  for (const auto& b : buckets) {
    total.g += b.g;
    total.h += b.h;
    total.count += b.count;
  }
  if (total.count < 2 || candidates.empty()) return std::nullopt;
  const double parent = score(total.g, total.h, lambda);

  std::optional<Split> best;
  double best_gain = 0.0;
  GradStats left{};
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    left.g += buckets[k].g;
    left.h += buckets[k].h;
    left.count += buckets[k].count;
    for (int side = 0; side < (missing.count > 0 ? 2 : 1); ++side) {
      const bool default_left = side == 0;
      const double gl = left.g + (default_left ? missing.g : 0.0);
      const double hl = left.h + (default_left ? missing.h : 0.0);
      const int cl = left.count + (default_left ? missing.count : 0);
      const double gr = total.g - gl;
      const double hr = total.h - hl;
      const int cr = total.count - cl;
      if (cl == 0 || cr == 0) continue;
      const double gain = 0.5 * (score(gl, hl, lambda) + score(gr, hr, lambda) - parent) - gamma;
      if (gain > best_gain) {
        best_gain = gain;
        best = Split{candidates[k], gain, default_left, static_cast<int>(k)};
      }
    }
  }
  return best;
}

std::optional<Split> find_best_split(std::span<const double> gradients,
                                     std::span<const double> hessians,
                                     std::span<const double> column,
                                     std::span<const double> candidates, double lambda, double gamma) {
  std::vector<GradStats> buckets(candidates.size() + 1);
  GradStats missing;
  for (std::size_t i = 0; i < column.size(); ++i) {
    GradStats* dst = &missing;
    if (!std::isnan(column[i])) {
      const auto b = std::upper_bound(candidates.begin(), candidates.end(), column[i]) - candidates.begin();
      dst = &buckets[static_cast<std::size_t>(b)];
    }
    dst->g += gradients[i];
    dst->h += hessians[i];
    dst->count += 1;
  }
  return scan_buckets(buckets, missing, candidates, lambda, gamma);
}

double leaf_weight(double g_sum, double h_sum, double lambda) {
  const double d = h_sum + lambda;
  return d > 0.0 ? -g_sum / d : 0.0;
}

}  // namespace cirsense::gbt
