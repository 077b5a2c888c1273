#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "cirsense/gbt/tree.hpp"

namespace cirsense::gbt {

enum class Objective { kSquared, kLogistic };

std::string_view to_string(Objective o);
Objective parse_objective(std::string_view s);

/// Squared-error boosting, one independent tree sequence per output.
struct Ensemble {
  std::vector<std::vector<Tree>> trees_per_output;
  std::vector<double> base_score;
  BoostConfig config;
  Objective objective = Objective::kSquared;
  int n_features = 0;
  /// Training loss (MSE, or log-loss for the logistic objective) of each output after each round.
  std::vector<std::vector<double>> train_loss;

  int outputs() const { return static_cast<int>(base_score.size()); }
  /// Raw scores (logits for the logistic objective) using the first
  /// `n_trees` rounds (all when negative).
  std::vector<double> predict(std::span<const double> x, int n_trees = -1) const;
  /// Rows x outputs, row-major.
  std::vector<double> predict(const FeatureMatrix& x, int n_trees = -1) const;
};

/// targets: rows x outputs, row-major. Per output: base = mean target, then
/// each round fits a tree to g = pred - y, h = 1 (on a seeded row subsample)
/// and adds learning_rate * tree(x). The logistic objective takes 0/1
/// targets, starts from the logit of the mean and uses g = p - y, h = p(1-p).
Ensemble fit_ensemble(const FeatureMatrix& features, std::span<const double> targets, int outputs,
                      const BoostConfig& cfg, Objective objective = Objective::kSquared);

struct HyperGrid {
  std::vector<int> n_estimators{100, 300, 600};
  std::vector<int> max_depth{3, 5, 8};
  std::vector<double> learning_rate{0.05, 0.1, 0.3};

  std::size_t size() const { return n_estimators.size() * max_depth.size() * learning_rate.size(); }
};

struct GridScore {
  int n_estimators = 0;
  int max_depth = 0;
  double learning_rate = 0.0;
  /// Mean squared error over validation rows and outputs.
  double val_mse = 0.0;

  friend bool operator==(const GridScore&, const GridScore&) = default;
};

struct GridSearchResult {
  BoostConfig best;
  /// One row per grid cell, ordered n_estimators, max_depth, learning_rate.
  std::vector<GridScore> table;
};

/// Scores every grid cell on the validation rows and returns the argmin,
/// breaking ties by fewer trees, then shallower trees, then smaller rate.
/// Cells sharing (max_depth, learning_rate) are scored from the staged
/// predictions of one fit; boosting is sequential, so the first n rounds of
/// that fit are exactly the n-round model.
GridSearchResult grid_search(const FeatureMatrix& train_x, std::span<const double> train_y,
                             const FeatureMatrix& val_x, std::span<const double> val_y, int outputs,
                             const HyperGrid& grid, const BoostConfig& base);

}  // namespace cirsense::gbt
