#include "cirsense/gbt/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <numeric>
#include <random>

#include "cirsense/seed.hpp"

namespace cirsense::gbt {

std::string_view to_string(Objective o) { return o == Objective::kLogistic ? "logistic" : "squared"; }

Objective parse_objective(std::string_view s) {
  if (s == "squared") return Objective::kSquared;
  if (s == "logistic") return Objective::kLogistic;
  throw std::invalid_argument("unknown objective '" + std::string(s) + "'");
}

namespace {

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

}  // namespace

std::vector<double> Ensemble::predict(std::span<const double> x, int n_trees) const {
  if (x.size() != static_cast<std::size_t>(n_features))
    throw ShapeError("ensemble expects " + std::to_string(n_features) + " features, got " +
                     std::to_string(x.size()));
  std::vector<double> out(base_score);
  for (std::size_t o = 0; o < trees_per_output.size(); ++o) {
    const auto& trees = trees_per_output[o];
    const std::size_t n = n_trees < 0 ? trees.size() : std::min(trees.size(), static_cast<std::size_t>(n_trees));
    for (std::size_t t = 0; t < n; ++t) out[o] += config.learning_rate * trees[t].predict(x);
  }
  return out;
}

std::vector<double> Ensemble::predict(const FeatureMatrix& x, int n_trees) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(x.rows) * base_score.size());
  for (int r = 0; r < x.rows; ++r) {
    const auto p = predict(x.row(r), n_trees);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

Ensemble fit_ensemble(const FeatureMatrix& features, std::span<const double> targets, int outputs,
                      const BoostConfig& cfg, Objective objective) {
  cfg.check().throw_if_any();
  const int n = features.rows;
  if (n < 1 || outputs < 1 || targets.size() != static_cast<std::size_t>(n) * outputs)
    throw ShapeError("fit_ensemble: targets must be rows x outputs");

  Ensemble e;
  e.config = cfg;
  e.objective = objective;
  e.n_features = features.cols;
  e.trees_per_output.resize(static_cast<std::size_t>(outputs));
  e.train_loss.resize(static_cast<std::size_t>(outputs));
  const ColumnIndex index(features);

  for (int o = 0; o < outputs; ++o) {
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = targets[static_cast<std::size_t>(i) * outputs + o];
    const bool logistic = objective == Objective::kLogistic;
    if (logistic)
      for (double v : y)
        if (v != 0.0 && v != 1.0) throw std::invalid_argument("logistic objective needs 0/1 targets");
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    const double base = logistic ? std::log(std::clamp(mean, 1e-6, 1 - 1e-6) / (1 - std::clamp(mean, 1e-6, 1 - 1e-6))) : mean;
    e.base_score.push_back(base);
    std::vector<double> pred(static_cast<std::size_t>(n), base);

    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    const auto n_sub = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.subsample * n));

    for (int round = 0; round < cfg.n_estimators; ++round) {
      std::vector<int> rows = all;
      if (n_sub < rows.size()) {
        std::mt19937_64 rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(o), static_cast<std::uint64_t>(round)}));
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(n_sub);
        std::sort(rows.begin(), rows.end());
      }
      std::vector<double> g(rows.size()), h(rows.size(), 1.0);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<std::size_t>(rows[i]);
        if (logistic) {
          const double p = sigmoid(pred[r]);
          g[i] = p - y[r];
          h[i] = std::max(p * (1 - p), 1e-16);
        } else {
          g[i] = pred[r] - y[r];
        }
      }
      Tree tree = fit_tree(g, h, index, rows, cfg);
      double loss = 0.0;
      for (int i = 0; i < n; ++i) {
        auto& p = pred[static_cast<std::size_t>(i)];
        p += cfg.learning_rate * tree.predict(features.row(i));
        const double t = y[static_cast<std::size_t>(i)];
        if (logistic) {
          // log(1 + e^p) - t p, stable for either sign
          loss += std::max(p, 0.0) + std::log1p(std::exp(-std::abs(p))) - t * p;
        } else {
          loss += (p - t) * (p - t);
        }
      }
      e.train_loss[static_cast<std::size_t>(o)].push_back(loss / n);
      e.trees_per_output[static_cast<std::size_t>(o)].push_back(std::move(tree));
    }
  }
  return e;
}

}  // namespace cirsense::gbt
