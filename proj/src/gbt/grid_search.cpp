#include <algorithm>
#include <tuple>

#include "cirsense/gbt/ensemble.hpp"
#include "cirsense/parallel.hpp"

namespace cirsense::gbt {

GridSearchResult grid_search(const FeatureMatrix& train_x, std::span<const double> train_y,
                             const FeatureMatrix& val_x, std::span<const double> val_y, int outputs,
                             const HyperGrid& grid, const BoostConfig& base) {
  Violations v;
  v.require(!grid.n_estimators.empty() && !grid.max_depth.empty() && !grid.learning_rate.empty(),
            "grid search needs at least one value per hyperparameter");
  v.require(val_x.rows >= 1, "grid search needs validation rows");
  v.require(val_y.size() == static_cast<std::size_t>(val_x.rows) * outputs,
            "validation targets must be rows x outputs");
  v.throw_if_any();

  std::vector<int> sizes = grid.n_estimators;
  std::sort(sizes.begin(), sizes.end());
  const int max_trees = sizes.back();

  struct Cell {
    int depth;
    double rate;
  };
  std::vector<Cell> cells;
  for (int d : grid.max_depth)
    for (double r : grid.learning_rate) cells.push_back({d, r});

  // mse[cell][k] for k indexing grid.n_estimators
  std::vector<std::vector<double>> mse(cells.size(), std::vector<double>(grid.n_estimators.size()));
  parallel_for(cells.size(), [&](std::size_t c) {
    BoostConfig cfg = base;
    cfg.max_depth = cells[c].depth;
    cfg.learning_rate = cells[c].rate;
    cfg.n_estimators = max_trees;
    const Ensemble e = fit_ensemble(train_x, train_y, outputs, cfg);
    for (std::size_t k = 0; k < grid.n_estimators.size(); ++k) {
      const auto pred = e.predict(val_x, grid.n_estimators[k]);
      double s = 0.0;
      for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - val_y[i];
        s += d * d;
      }
      mse[c][k] = s / static_cast<double>(pred.size());
    }
  });

  GridSearchResult result;
  for (std::size_t k = 0; k < grid.n_estimators.size(); ++k)
    for (std::size_t c = 0; c < cells.size(); ++c)
      result.table.push_back({grid.n_estimators[k], cells[c].depth, cells[c].rate, mse[c][k]});

  const auto key = [](const GridScore& s) {
    return std::make_tuple(s.val_mse, s.n_estimators, s.max_depth, s.learning_rate);
  };
  const auto best = std::min_element(result.table.begin(), result.table.end(),
                                     [&](const GridScore& a, const GridScore& b) { return key(a) < key(b); });
  result.best = base;
  result.best.n_estimators = best->n_estimators;
  result.best.max_depth = best->max_depth;
  result.best.learning_rate = best->learning_rate;
  return result;
}

}  // namespace cirsense::gbt
