#include <doctest.h>

#include <random>

#include "cirsense/dsp.hpp"
#include "cirsense/sim.hpp"
#include "oracles.hpp"

using namespace cirsense;

namespace {

std::vector<Complex> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::vector<Complex> x(n);
  for (auto& v : x) v = {g(rng), g(rng)};
  return x;
}

double norm2(std::span<const Complex> x) {
  double s = 0;
  for (const auto& v : x) s += std::norm(v);
  return s;
}

Cir cir_of(std::vector<Complex> taps) {
  Cir c;
  c.taps = std::move(taps);
  c.bin_spacing_s = 1e-9;
  return c;
}

}  // namespace

TEST_SUITE("dsp") {

TEST_CASE("constant spectrum gives an impulse") {
  FrequencySweep s;
  s.config.num_points = 16;
  s.samples.assign(16, Complex(1, 0));
  const auto c = cir_from_sweep(s);
  CHECK(std::abs(c.taps[0] - Complex(1, 0)) < 1e-15);
  for (std::size_t b = 1; b < 16; ++b) CHECK(std::abs(c.taps[b]) < 1e-15);
}

TEST_CASE("fast inverse transform equals the quadratic one") {
  for (std::size_t n : {4u, 7u, 64u, 1001u}) {
    for (std::uint64_t seed = 0; seed < (n == 1001 ? 3u : 20u); ++seed) {
      const auto x = random_vector(n, seed * 7 + n);
      const auto fast = inverse_dft(x);
      const auto slow = oracle::idft(x);
      CHECK(oracle::max_abs_diff(fast, slow) <= 1e-9 * std::sqrt(norm2(slow) / static_cast<double>(n)) + 1e-15);
      // Parseval with the 1/N convention
      CHECK(norm2(fast) == doctest::Approx(norm2(x) / static_cast<double>(n)).epsilon(1e-9));
    }
  }
}

TEST_CASE("round trip through the forward transform") {
  const auto x = random_vector(333, 1);
  const auto back = forward_dft(inverse_dft(x));
  CHECK(oracle::max_abs_diff(back, x) <= 1e-9 * std::sqrt(norm2(x)));
}

TEST_CASE("a path on a tap delay peaks at that tap") {
  SweepConfig cfg;
  cfg.num_points = 101;
  cfg.noise_std = 0;
  const int m = 17;
  // The grid starts at f0, so tap m is reached by a delay of m * bin spacing.
  const PropagationPath p{{1, 0}, m * cfg.bin_spacing_s(), 0};
  const auto cir = cir_from_sweep(synthesize_sweep(std::span(&p, 1), cfg, 0));
  const auto slow = oracle::idft(synthesize_sweep(std::span(&p, 1), cfg, 0).samples);
  std::size_t best = 0;
  for (std::size_t b = 0; b < cir.taps.size(); ++b)
    if (std::abs(cir.taps[b]) > std::abs(cir.taps[best])) best = b;
  CHECK(best == static_cast<std::size_t>(m));
  CHECK(std::abs(cir.taps[best]) == doctest::Approx(1.0));
  CHECK(oracle::max_abs_diff(cir.taps, slow) < 1e-12);
  CHECK(cir.bin_spacing_s == doctest::Approx(cfg.bin_spacing_s()));
}

TEST_CASE("magnitude features and normalization") {
  std::vector<Complex> t(8, Complex(0, 0));
  t[0] = {3, 4};
  const std::vector<Cir> one{cir_of(t)};
  FeatureOptions o;
  o.k_taps = 2;
  o.normalize = Normalization::kNone;
  auto f = features_from_cirs(one, o);
  CHECK(f.values == std::vector<double>{5, 0});
  o.normalize = Normalization::kPerLinkMax;
  f = features_from_cirs(one, o);
  CHECK(f.values == std::vector<double>{1, 0});
}

TEST_CASE("zero link stays zero under normalization") {
  const std::vector<Cir> one{cir_of(std::vector<Complex>(8))};
  FeatureOptions o;
  o.k_taps = 4;
  const auto f = features_from_cirs(one, o);
  for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("layouts") {
  std::vector<Cir> three;
  for (int k = 0; k < 3; ++k) three.push_back(cir_of(random_vector(1001, static_cast<std::uint64_t>(k))));
  FeatureOptions o;
  auto f = features_from_cirs(three, o);
  CHECK(f.layout.num_links == 3);
  CHECK(f.layout.channel_count() == 3);
  CHECK(f.layout.length == 256);
  CHECK(f.values.size() == 768u);
  o.mode = FeatureMode::kRealImag;
  o.normalize = Normalization::kNone;
  f = features_from_cirs(three, o);
  CHECK(f.layout.channel_count() == 6);
  CHECK(f.link(1)[0] == three[1].taps[0].real());
  CHECK(f.link(1)[256] == three[1].taps[0].imag());
}

TEST_CASE("feature errors") {
  std::vector<Cir> bad{cir_of(random_vector(8, 1)), cir_of(random_vector(9, 2))};
  FeatureOptions o;
  o.k_taps = 4;
  CHECK_THROWS_AS(features_from_cirs(bad, o), ShapeError);
  const std::vector<Cir> one{cir_of(random_vector(8, 1))};
  o.k_taps = 9;
  CHECK_THROWS_AS(features_from_cirs(one, o), std::invalid_argument);
  o.k_taps = 0;
  CHECK_THROWS_AS(features_from_cirs(one, o), std::invalid_argument);
}

TEST_CASE("link selection keeps the chosen blocks in order") {
  std::vector<Cir> three;
  for (int k = 0; k < 3; ++k) three.push_back(cir_of(random_vector(32, static_cast<std::uint64_t>(k + 10))));
  FeatureOptions o;
  o.k_taps = 16;
  const auto f = features_from_cirs(three, o);
  const std::vector<int> pick{2, 0};
  const auto g = select_links(f, pick);
  CHECK(g.layout.num_links == 2);
  CHECK(std::equal(g.link(0).begin(), g.link(0).end(), f.link(2).begin()));
  CHECK(std::equal(g.link(1).begin(), g.link(1).end(), f.link(0).begin()));
}

TEST_CASE("features are finite and deterministic") {
  std::vector<Cir> c{cir_of(random_vector(64, 3))};
  FeatureOptions o;
  o.k_taps = 64;
  const auto a = features_from_cirs(c, o);
  const auto b = features_from_cirs(c, o);
  CHECK(a.values == b.values);
  for (double v : a.values) CHECK(std::isfinite(v));
}

}  // TEST_SUITE
