#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cirsense/gbt/tree.hpp"
#include "cirsense/parallel.hpp"

namespace cirsense::gbt {

std::vector<double> FeatureMatrix::column(int c) const {
  std::vector<double> out(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) out[static_cast<std::size_t>(r)] = at(r, c);
  return out;
}

Violations BoostConfig::check() const {
  Violations v;
  v.require(n_estimators >= 1, "boost.n_estimators must be >= 1");
  v.require(max_depth >= 1, "boost.max_depth must be >= 1");
  v.require(learning_rate > 0 && learning_rate <= 1, "boost.learning_rate must be in (0, 1]");
  v.require(lambda >= 0, "boost.lambda must be >= 0");
  v.require(gamma >= 0, "boost.gamma must be >= 0");
  v.require(n_quantile_candidates >= 1 && n_quantile_candidates < 65535,
            "boost.n_quantile_candidates must be in [1, 65534]");
  v.require(subsample > 0 && subsample <= 1, "boost.subsample must be in (0, 1]");
  return v;
}

double Tree::predict(std::span<const double> x) const {
  if (nodes.empty()) return 0.0;
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    const double v = x[static_cast<std::size_t>(n.feature_index)];
    const bool left = std::isnan(v) ? n.default_left : v < n.threshold;
    i = left ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].leaf_weight;
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.is_leaf()) continue;
    d[static_cast<std::size_t>(n.left)] = d[i] + 1;
    d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    deepest = std::max(deepest, d[i] + 1);
  }
  return deepest;
}

int Tree::leaf_count() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

ColumnIndex::ColumnIndex(const FeatureMatrix& features) : features_(&features) {
  sorted_.resize(static_cast<std::size_t>(features.cols));
  for (int f = 0; f < features.cols; ++f) {
    auto& order = sorted_[static_cast<std::size_t>(f)];
    order.reserve(static_cast<std::size_t>(features.rows));
    for (int r = 0; r < features.rows; ++r)
      if (!std::isnan(features.at(r, f))) order.push_back(r);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return features.at(a, f) < features.at(b, f); });
  }
}

namespace {

constexpr std::uint16_t kMissingBucket = std::numeric_limits<std::uint16_t>::max();

class TreeBuilder {
 public:
  TreeBuilder(std::span<const double> g, std::span<const double> h, const ColumnIndex& index,
              std::span<const int> rows, const BoostConfig& cfg)
      : g_(g), h_(h), index_(index), rows_(rows.begin(), rows.end()), cfg_(cfg) {
    const auto& x = index.features();
    const int n_features = x.cols;
    candidates_.resize(static_cast<std::size_t>(n_features));
    buckets_.resize(static_cast<std::size_t>(n_features));

    // local position of every global row in the subset
    std::vector<int> local(static_cast<std::size_t>(x.rows), -1);
    for (std::size_t i = 0; i < rows_.size(); ++i) local[static_cast<std::size_t>(rows_[i])] = static_cast<int>(i);

    parallel_for(static_cast<std::size_t>(n_features), [&](std::size_t f) {
      std::vector<double> values, hess;
      std::vector<int> members;
      for (int r : index.sorted_rows(static_cast<int>(f))) {
        const int l = local[static_cast<std::size_t>(r)];
        if (l < 0) continue;
        members.push_back(l);
        if (h_[static_cast<std::size_t>(l)] > 0.0) {
          values.push_back(x.at(r, static_cast<int>(f)));
          hess.push_back(h_[static_cast<std::size_t>(l)]);
        }
      }
      auto& cand = candidates_[f];
      cand = candidates_from_sorted(values, hess, cfg.n_quantile_candidates);
      auto& bucket = buckets_[f];
      bucket.assign(rows_.size(), kMissingBucket);
      std::size_t k = 0;
      for (int l : members) {
        const double v = x.at(rows_[static_cast<std::size_t>(l)], static_cast<int>(f));
        while (k < cand.size() && cand[k] <= v) ++k;
        bucket[static_cast<std::size_t>(l)] = static_cast<std::uint16_t>(k);
      }
    });
  }

  Tree build() {
    std::vector<int> all(rows_.size());
    std::iota(all.begin(), all.end(), 0);
    grow(all, 0);
    return std::move(tree_);
  }

 private:
  struct Choice {
    int feature = -1;
    Split split;
  };

  Choice best_split(const std::vector<int>& node) const {
    const int n_features = static_cast<int>(candidates_.size());
    std::vector<std::optional<Split>> per_feature(static_cast<std::size_t>(n_features));
    auto scan = [&](std::size_t f) {
      const auto& cand = candidates_[f];
      if (cand.empty()) return;
      std::vector<GradStats> hist(cand.size() + 1);
      GradStats missing;
      const auto& bucket = buckets_[f];
      for (int l : node) {
        const auto b = bucket[static_cast<std::size_t>(l)];
        GradStats& s = b == kMissingBucket ? missing : hist[b];
        s.g += g_[static_cast<std::size_t>(l)];
        s.h += h_[static_cast<std::size_t>(l)];
        s.count += 1;
      }
      per_feature[f] = scan_buckets(hist, missing, cand, cfg_.lambda, cfg_.gamma);
    };
    const bool wide = node.size() * static_cast<std::size_t>(n_features) >= 200000;
    parallel_for(static_cast<std::size_t>(n_features), scan, wide ? 0u : 1u);

    Choice best;
    for (int f = 0; f < n_features; ++f) {
      const auto& s = per_feature[static_cast<std::size_t>(f)];
      if (s && (best.feature < 0 || s->gain > best.split.gain)) best = {f, *s};
    }
    return best;
  }

  int grow(const std::vector<int>& node, int depth) {
    double gs = 0.0, hs = 0.0;
    for (int l : node) {
      gs += g_[static_cast<std::size_t>(l)];
      hs += h_[static_cast<std::size_t>(l)];
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});

    Choice choice;
    if (depth < cfg_.max_depth && node.size() >= 2) choice = best_split(node);
    if (choice.feature < 0) {
      tree_.nodes[static_cast<std::size_t>(id)].leaf_weight = leaf_weight(gs, hs, cfg_.lambda);
      return id;
    }

    std::vector<int> left, right;
    const auto& bucket = buckets_[static_cast<std::size_t>(choice.feature)];
    for (int l : node) {
      const auto b = bucket[static_cast<std::size_t>(l)];
      const bool go_left = b == kMissingBucket ? choice.split.default_left
                                               : b <= static_cast<std::uint16_t>(choice.split.candidate);
      (go_left ? left : right).push_back(l);
    }
    const int l_id = grow(left, depth + 1);
    const int r_id = grow(right, depth + 1);
    auto& n = tree_.nodes[static_cast<std::size_t>(id)];
    n.feature_index = choice.feature;
    n.threshold = choice.split.threshold;
    n.default_left = choice.split.default_left;
    n.left = l_id;
    n.right = r_id;
    return id;
  }

  std::span<const double> g_;
  std::span<const double> h_;
  const ColumnIndex& index_;
  std::vector<int> rows_;
  const BoostConfig& cfg_;
  std::vector<std::vector<double>> candidates_;
  std::vector<std::vector<std::uint16_t>> buckets_;
  Tree tree_;
};

}  // namespace

Tree fit_tree(std::span<const double> gradients, std::span<const double> hessians,
              const ColumnIndex& index, std::span<const int> rows, const BoostConfig& cfg) {
  cfg.check().throw_if_any();
  if (gradients.size() != rows.size() || hessians.size() != rows.size())
    throw ShapeError("fit_tree: gradient/hessian count must match the row subset");
  return TreeBuilder(gradients, hessians, index, rows, cfg).build();
}

Tree fit_tree(std::span<const double> gradients, std::span<const double> hessians,
              const FeatureMatrix& features, const BoostConfig& cfg) {
  if (gradients.size() != static_cast<std::size_t>(features.rows))
    throw ShapeError("fit_tree: one gradient per row required");
  const ColumnIndex index(features);
  std::vector<int> rows(static_cast<std::size_t>(features.rows));
  std::iota(rows.begin(), rows.end(), 0);
  return fit_tree(gradients, hessians, index, rows, cfg);
}

}  // namespace cirsense::gbt
