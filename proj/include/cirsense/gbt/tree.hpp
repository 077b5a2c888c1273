#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cirsense/error.hpp"

namespace cirsense::gbt {

/// Row-major sample x feature matrix. NaN marks a missing value.
struct FeatureMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  FeatureMatrix() = default;
  FeatureMatrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c) {}

  std::span<const double> row(int r) const {
    return {values.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  std::vector<double> column(int c) const;
};

struct BoostConfig {
  int n_estimators = 300;
  int max_depth = 5;
  double learning_rate = 0.1;
  /// L2 penalty on leaf weights.
  double lambda = 1.0;
  /// Minimum split gain (complexity cost per extra leaf).
  double gamma = 0.0;
  int n_quantile_candidates = 32;
  double subsample = 1.0;
  std::uint64_t seed = 0;

  Violations check() const;
  friend bool operator==(const BoostConfig&, const BoostConfig&) = default;
};

struct TreeNode {
  int feature_index = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double leaf_weight = 0.0;
  /// Side taken by a missing feature value.
  bool default_left = true;

  bool is_leaf() const { return left < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Nodes in depth-first order; nodes[0] is the root. Samples with
/// x[feature] < threshold go left.
struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  int depth() const;
  int leaf_count() const;
  friend bool operator==(const Tree&, const Tree&) = default;
};

struct Split {
  double threshold = 0.0;
  double gain = 0.0;
  bool default_left = true;
  /// Index of the winning threshold in the candidate list.
  int candidate = -1;
};

/// Hessian-weighted percentile thresholds of `column` (rows with NaN or zero
/// hessian are ignored). Thresholds are midpoints between adjacent distinct
/// values; when there are at most n_candidates + 1 distinct values every
/// midpoint is returned, which makes split finding exact.
std::vector<double> propose_candidates(std::span<const double> column,
                                       std::span<const double> hessians, int n_candidates);

/// Same proposal on values already sorted ascending (hessians alongside).
std::vector<double> candidates_from_sorted(std::span<const double> values,
                                           std::span<const double> hessians, int n_candidates);

/// Regularized second-order gain
///   1/2 [GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)] - gamma
/// over the given thresholds; missing values are tried on both sides.
/// Returns nullopt when no candidate has a positive gain or fewer than two
/// samples are present.
std::optional<Split> find_best_split(std::span<const double> gradients,
                                     std::span<const double> hessians,
                                     std::span<const double> column,
                                     std::span<const double> candidates, double lambda, double gamma);

/// Per-bucket gradient statistics. Bucket b holds values in
/// [candidates[b-1], candidates[b]).
struct GradStats {
  double g = 0.0;
  double h = 0.0;
  int count = 0;
};

std::optional<Split> scan_buckets(std::span<const GradStats> buckets, const GradStats& missing,
                                  std::span<const double> candidates, double lambda, double gamma);

/// Optimal leaf weight -G/(H+lambda).
double leaf_weight(double g_sum, double h_sum, double lambda);

/// Greedy depth-first tree on all rows of `features`.
Tree fit_tree(std::span<const double> gradients, std::span<const double> hessians,
              const FeatureMatrix& features, const BoostConfig& cfg);

class ColumnIndex;

/// Tree on a row subset, reusing a presorted column index.
Tree fit_tree(std::span<const double> gradients, std::span<const double> hessians,
              const ColumnIndex& index, std::span<const int> rows, const BoostConfig& cfg);

/// Per-feature row order sorted by value (missing values excluded), built
/// once per training set.
class ColumnIndex {
 public:
  explicit ColumnIndex(const FeatureMatrix& features);
  const FeatureMatrix& features() const noexcept { return *features_; }
  std::span<const int> sorted_rows(int feature) const {
    return sorted_[static_cast<std::size_t>(feature)];
  }

 private:
  const FeatureMatrix* features_;
  std::vector<std::vector<int>> sorted_;
};

}  // namespace cirsense::gbt
