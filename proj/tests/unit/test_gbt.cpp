#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cirsense/gbt/checkpoint.hpp"
#include "cirsense/gbt/ensemble.hpp"
#include "cirsense/gbt/tree.hpp"
#include "oracles.hpp"

using namespace cirsense;
using namespace cirsense::gbt;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

FeatureMatrix random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  FeatureMatrix m(rows, cols);
  for (auto& v : m.values) v = g(rng);
  return m;
}

std::vector<bool> partition_of(const std::vector<double>& x, const Split& s) {
  std::vector<bool> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::isnan(x[i]) ? s.default_left : x[i] < s.threshold;
  return out;
}

struct Instance {
  std::vector<double> g, h, x;
};

Instance random_instance(std::mt19937_64& rng, bool with_missing) {
  std::uniform_int_distribution<int> size(2, 64);
  std::normal_distribution<double> norm(0, 1);
  std::uniform_real_distribution<double> unit(0.1, 2.0);
  const int n = size(rng);
  const bool ties = rng() % 2 == 0;
  Instance in;
  for (int i = 0; i < n; ++i) {
    in.g.push_back(norm(rng));
    in.h.push_back(rng() % 3 == 0 ? 1.0 : unit(rng));
    double v = norm(rng);
    if (ties) v = std::round(v * 3);
    if (with_missing && rng() % 5 == 0) v = kNan;
    in.x.push_back(v);
  }
  return in;
}

std::vector<double> exhaustive(const Instance& in) {
  return propose_candidates(in.x, in.h, static_cast<int>(in.x.size()) + 1);
}

}  // namespace

TEST_SUITE("gbt") {

TEST_CASE("split example: two clusters") {
  const std::vector<double> x{1, 2, 3, 4}, g{0, 0, -10, -10}, h{1, 1, 1, 1};
  const auto cand = propose_candidates(x, h, 32);
  CHECK(cand == std::vector<double>{1.5, 2.5, 3.5});
  const auto s = find_best_split(g, h, x, cand, 0, 0);
  REQUIRE(s);
  CHECK(s->threshold > 2);
  CHECK(s->threshold < 3);
  // G_L=0,H_L=2 ; G_R=-20,H_R=2 ; parent -20,4
  CHECK(s->gain == doctest::Approx(0.5 * (0.0 + 400.0 / 2 - 400.0 / 4)));
  const auto b = oracle::brute_force_split(g, h, x, 0, 0);
  CHECK(b.threshold == s->threshold);
}

TEST_CASE("no split on a constant target or huge lambda") {
  const std::vector<double> x{1, 2, 3, 4}, h{1, 1, 1, 1};
  const std::vector<double> g{-1, -1, -1, -1};
  CHECK_FALSE(find_best_split(g, h, x, propose_candidates(x, h, 8), 0, 0));
  const std::vector<double> g2{0, 0, -10, -10};
  CHECK_FALSE(find_best_split(g2, h, x, propose_candidates(x, h, 8), 1e300, 0.0));
  CHECK_FALSE(find_best_split(g2, h, x, propose_candidates(x, h, 8), 1e300, 0.5));
  // gamma above the best gain prunes
  CHECK_FALSE(find_best_split(g2, h, x, propose_candidates(x, h, 8), 0, 51));
  CHECK(find_best_split(g2, h, x, propose_candidates(x, h, 8), 0, 49));
}

TEST_CASE("single sample or single value has no candidates") {
  const std::vector<double> one{3}, h1{1};
  CHECK(propose_candidates(one, h1, 8).empty());
  const std::vector<double> same{2, 2, 2}, h3{1, 1, 1};
  CHECK(propose_candidates(same, h3, 8).empty());
}

TEST_CASE("quantile candidates are hessian weighted percentiles") {
  std::vector<double> x, h;
  for (int i = 0; i < 100; ++i) {
    x.push_back(i);
    h.push_back(1.0);
  }
  const auto c = propose_candidates(x, h, 3);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == doctest::Approx(24.5));
  CHECK(c[1] == doctest::Approx(49.5));
  CHECK(c[2] == doctest::Approx(74.5));
  // all mass on the top half pushes candidates up
  for (int i = 0; i < 50; ++i) h[static_cast<std::size_t>(i)] = 1e-9;
  const auto up = propose_candidates(x, h, 3);
  for (double v : up) CHECK(v > 49);
  CHECK(std::is_sorted(up.begin(), up.end()));
}

TEST_CASE("split equals the brute-force optimum") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto in = random_instance(rng, trial % 3 == 0);
    const double lambda = trial % 2 ? 1.0 : 0.0;
    const auto s = find_best_split(in.g, in.h, in.x, exhaustive(in), lambda, 0);
    const auto b = oracle::brute_force_split(in.g, in.h, in.x, lambda, 0);
    REQUIRE(s.has_value() == b.found);
    if (!b.found) continue;
    CHECK(std::abs(s->gain - b.gain) <= 1e-9);
    CHECK(partition_of(in.x, *s) == b.goes_left);
  }
}

TEST_CASE("missing values learn a default direction") {
  // missing samples look like the right cluster
  const std::vector<double> x{1, 2, 3, 4, kNan, kNan};
  const std::vector<double> g{1, 1, -1, -1, -1, -1}, h(6, 1.0);
  const auto s = find_best_split(g, h, x, propose_candidates(x, h, 8), 0, 0);
  REQUIRE(s);
  CHECK_FALSE(s->default_left);
  CHECK(s->threshold == 2.5);
  const std::vector<double> g2{-1, -1, 1, 1, -1, -1};
  const auto s2 = find_best_split(g2, h, x, propose_candidates(x, h, 8), 0, 0);
  REQUIRE(s2);
  CHECK(s2->default_left);

  FeatureMatrix f(6, 1);
  f.values = x;
  BoostConfig cfg;
  cfg.max_depth = 1;
  cfg.lambda = 0;
  const Tree t = fit_tree(g, h, f, cfg);
  CHECK(t.predict(std::vector<double>{kNan}) == doctest::Approx(1.0));
  CHECK(t.predict(std::vector<double>{1.0}) == doctest::Approx(-1.0));
}

TEST_CASE("monotone transform leaves the partition unchanged") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_instance(rng, false);
    std::vector<double> tx;
    for (double v : in.x) tx.push_back(std::exp(2 * v) + 3);
    const auto a = find_best_split(in.g, in.h, in.x, propose_candidates(in.x, in.h, 8), 0.5, 0);
    const auto b = find_best_split(in.g, in.h, tx, propose_candidates(tx, in.h, 8), 0.5, 0);
    REQUIRE(a.has_value() == b.has_value());
    if (!a) continue;
    CHECK(partition_of(in.x, *a) == partition_of(tx, *b));
    CHECK(a->gain == doctest::Approx(b->gain).epsilon(1e-12));
  }
}

TEST_CASE("leaf weights") {
  FeatureMatrix f(2, 1);
  f.values = {1, 2};
  const std::vector<double> g{-1, -1}, h{1, 1};
  BoostConfig cfg;
  cfg.lambda = 0;
  const Tree t = fit_tree(g, h, f, cfg);
  REQUIRE(t.nodes.size() == 1);
  CHECK(t.nodes[0].leaf_weight == doctest::Approx(1.0));
  cfg.lambda = 2;
  CHECK(fit_tree(g, h, f, cfg).nodes[0].leaf_weight == doctest::Approx(0.5));
  CHECK(leaf_weight(-2, 2, 0) == 1.0);
}

TEST_CASE("tree structure respects max_depth") {
  for (int depth : {1, 2, 3, 5}) {
    const auto f = random_matrix(200, 4, static_cast<std::uint64_t>(depth));
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0, 1);
    std::vector<double> g(200), h(200, 1.0);
    for (auto& v : g) v = n(rng);
    BoostConfig cfg;
    cfg.max_depth = depth;
    cfg.lambda = 0.1;
    const Tree t = fit_tree(g, h, f, cfg);
    CHECK(t.depth() <= depth);
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      const auto& node = t.nodes[i];
      if (node.is_leaf()) {
        CHECK(node.right < 0);
      } else {
        CHECK(node.left > static_cast<int>(i));
        CHECK(node.right > static_cast<int>(i));
      }
    }
  }
}

TEST_CASE("constant targets give a constant ensemble") {
  const auto f = random_matrix(20, 3, 1);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 2 ? -1.5 : 2.25;
  BoostConfig cfg;
  cfg.n_estimators = 5;
  const auto e = fit_ensemble(f, y, 2, cfg);
  CHECK(e.base_score == std::vector<double>{2.25, -1.5});
  for (int r = 0; r < 20; ++r) {
    const auto p = e.predict(f.row(r));
    CHECK(p[0] == 2.25);
    CHECK(p[1] == -1.5);
  }
  CHECK(e.trees_per_output[0].size() == e.trees_per_output[1].size());
}

TEST_CASE("memorization of a tiny set") {
  const auto f = random_matrix(8, 2, 3);
  std::vector<double> y;
  for (int i = 0; i < 8; ++i) {
    y.push_back(i * 0.7);
    y.push_back(std::sin(i));
  }
  BoostConfig cfg;
  cfg.n_estimators = 3;
  cfg.max_depth = 8;
  cfg.learning_rate = 1;
  cfg.lambda = 0;
  const auto e = fit_ensemble(f, y, 2, cfg);
  const auto p = e.predict(f);
  double mse = 0;
  for (std::size_t i = 0; i < p.size(); ++i) mse += (p[i] - y[i]) * (p[i] - y[i]);
  CHECK(mse / static_cast<double>(p.size()) <= 1e-6);
}

TEST_CASE("training loss never increases and predictions stay bounded") {
  const auto f = random_matrix(150, 5, 7);
  std::vector<double> y;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 0.1);
  for (int r = 0; r < 150; ++r) {
    y.push_back(f.at(r, 0) * 2 + f.at(r, 1) + n(rng));
    y.push_back(f.at(r, 2) > 0 ? 1.0 : -1.0);
  }
  BoostConfig cfg;
  cfg.n_estimators = 40;
  cfg.max_depth = 3;
  cfg.learning_rate = 0.3;
  const auto e = fit_ensemble(f, y, 2, cfg);
  for (const auto& curve : e.train_loss) {
    REQUIRE(curve.size() == 40);
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] <= curve[i - 1] + 1e-12);
  }
  const auto probe = random_matrix(100, 5, 8);
  for (int o = 0; o < 2; ++o) {
    double lo = 1e300, hi = -1e300, slack = 0;
    for (int r = 0; r < 150; ++r) {
      lo = std::min(lo, y[static_cast<std::size_t>(r) * 2 + static_cast<std::size_t>(o)]);
      hi = std::max(hi, y[static_cast<std::size_t>(r) * 2 + static_cast<std::size_t>(o)]);
    }
    for (const auto& t : e.trees_per_output[static_cast<std::size_t>(o)]) {
      double m = 0;
      for (const auto& node : t.nodes)
        if (node.is_leaf()) m = std::max(m, std::abs(node.leaf_weight));
      slack += cfg.learning_rate * m;
    }
    for (int r = 0; r < 100; ++r) {
      const double p = e.predict(probe.row(r))[static_cast<std::size_t>(o)];
      CHECK(std::isfinite(p));
      CHECK(p >= lo - slack);
      CHECK(p <= hi + slack);
    }
  }
}

TEST_CASE("subsampled fits are deterministic per seed") {
  const auto f = random_matrix(60, 3, 2);
  std::vector<double> y;
  for (int r = 0; r < 60; ++r) y.push_back(f.at(r, 1));
  BoostConfig cfg;
  cfg.n_estimators = 10;
  cfg.subsample = 0.5;
  cfg.seed = 11;
  const auto a = fit_ensemble(f, y, 1, cfg);
  const auto b = fit_ensemble(f, y, 1, cfg);
  CHECK(a.trees_per_output == b.trees_per_output);
  cfg.seed = 12;
  const auto c = fit_ensemble(f, y, 1, cfg);
  CHECK_FALSE(a.trees_per_output == c.trees_per_output);
}

TEST_CASE("logistic objective separates classes") {
  const auto f = random_matrix(80, 2, 4);
  std::vector<double> y;
  for (int r = 0; r < 80; ++r) y.push_back(f.at(r, 0) > 0.2 ? 1.0 : 0.0);
  BoostConfig cfg;
  cfg.n_estimators = 30;
  cfg.max_depth = 2;
  const auto e = fit_ensemble(f, y, 1, cfg, Objective::kLogistic);
  int correct = 0;
  for (int r = 0; r < 80; ++r) correct += (e.predict(f.row(r))[0] > 0) == (y[static_cast<std::size_t>(r)] > 0.5);
  CHECK(correct == 80);
  std::vector<double> bad(80, 0.5);
  CHECK_THROWS(fit_ensemble(f, bad, 1, cfg, Objective::kLogistic));
}

TEST_CASE("config validation lists every violation") {
  BoostConfig cfg;
  cfg.n_estimators = 0;
  cfg.max_depth = 0;
  cfg.learning_rate = 1.5;
  cfg.lambda = -1;
  cfg.gamma = -1;
  cfg.subsample = 0;
  CHECK(cfg.check().items().size() == 6);
  const auto f = random_matrix(4, 1, 1);
  std::vector<double> y(4, 0.0);
  CHECK_THROWS_AS(fit_ensemble(f, y, 1, cfg), ConfigError);
  CHECK_THROWS_AS(fit_ensemble(f, std::vector<double>(3, 0.0), 1, BoostConfig{}), ShapeError);
}

TEST_CASE("grid search") {
  // noiseless step target: depth-1 stumps at rate 1 reach zero validation error
  FeatureMatrix tx(20, 1), vx(10, 1);
  std::vector<double> ty, vy;
  for (int i = 0; i < 20; ++i) {
    tx.at(i, 0) = i;
    ty.push_back(i < 10 ? 0.0 : 5.0);
  }
  for (int i = 0; i < 10; ++i) {
    vx.at(i, 0) = i * 2 + 0.25;
    vy.push_back(i * 2 + 0.25 < 10 ? 0.0 : 5.0);
  }
  BoostConfig base;
  base.lambda = 0;

  HyperGrid one{{7}, {2}, {0.2}};
  const auto r1 = grid_search(tx, ty, vx, vy, 1, one, base);
  CHECK(r1.table.size() == 1);
  CHECK(r1.best.n_estimators == 7);
  CHECK(r1.best.max_depth == 2);
  CHECK(r1.best.learning_rate == 0.2);

  HyperGrid g{{1, 5}, {1, 3}, {0.1, 1.0}};
  const auto r = grid_search(tx, ty, vx, vy, 1, g, base);
  CHECK(r.table.size() == g.size());
  CHECK(r.best.learning_rate == 1.0);
  CHECK(r.best.n_estimators == 1);
  CHECK(r.best.max_depth == 1);
  double best = 1e300;
  for (const auto& s : r.table) best = std::min(best, s.val_mse);
  CHECK(best <= 1e-12);

  // prefix scoring matches a standalone fit
  for (const auto& s : r.table) {
    BoostConfig c = base;
    c.n_estimators = s.n_estimators;
    c.max_depth = s.max_depth;
    c.learning_rate = s.learning_rate;
    const auto p = fit_ensemble(tx, ty, 1, c).predict(vx);
    double mse = 0;
    for (std::size_t i = 0; i < p.size(); ++i) mse += (p[i] - vy[i]) * (p[i] - vy[i]);
    CHECK(mse / 10 == doctest::Approx(s.val_mse).epsilon(1e-12));
  }
  CHECK_THROWS(grid_search(tx, ty, vx, vy, 1, HyperGrid{{}, {1}, {0.1}}, base));
}

TEST_CASE("checkpoint round trip") {
  const auto f = random_matrix(40, 3, 5);
  std::vector<double> y;
  for (int r = 0; r < 40; ++r) {
    y.push_back(f.at(r, 0));
    y.push_back(f.at(r, 2) * 2);
  }
  BoostConfig cfg;
  cfg.n_estimators = 6;
  cfg.max_depth = 3;
  GbtCheckpoint c;
  c.ensemble = fit_ensemble(f, y, 2, cfg);
  c.meta.receiver_ids = {2, 3};
  c.meta.config_snapshot = R"({"seed":1})";
  c.grid_table = {{100, 3, 0.1, 0.5}};
  const auto bytes = encode_checkpoint(c);
  const auto d = decode_checkpoint(bytes);
  CHECK(d.ensemble.trees_per_output == c.ensemble.trees_per_output);
  CHECK(d.ensemble.base_score == c.ensemble.base_score);
  CHECK(d.ensemble.config == c.ensemble.config);
  CHECK(d.meta == c.meta);
  REQUIRE(d.grid_table.size() == 1);
  CHECK(d.grid_table[0].val_mse == 0.5);
  CHECK(d.ensemble.predict(f) == c.ensemble.predict(f));
  CHECK(encode_checkpoint(d) == bytes);

  auto flipped = bytes;
  flipped[flipped.size() - 9] ^= 0x40;
  CHECK_THROWS_AS(decode_checkpoint(flipped), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(magic), FormatError);
  auto extra = bytes;
  extra.push_back(0);
  CHECK_THROWS_AS(decode_checkpoint(extra), FormatError);
}

}  // TEST_SUITE
