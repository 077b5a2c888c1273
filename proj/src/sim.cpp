#include "cirsense/sim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "cirsense/seed.hpp"

namespace cirsense {

namespace {

constexpr double kColocatedTolerance = 1e-9;

void require_apart(Point a, Point b, const char* what) {
  if (distance(a, b) <= kColocatedTolerance)
    throw GeometryError(std::string("co-located nodes: ") + what);
}

// Fractional part of a*b, with the product split exactly (two-product).
double frac_product(double a, double b) {
  const double hi = a * b;
  const double lo = std::fma(a, b, -hi);
  return (hi - std::nearbyint(hi)) + lo;
}

// exp(-j 2 pi (f + d) tau) with f = fc + offset and tau = delay + cal. Each
// term is multiplied separately so neither the rounding of an absolute
// frequency near fc nor that of the summed delay enters the phase.
Complex unit_phasor(double fc, double offset, double d, double delay, double cal) {
  const double frac = frac_product(fc, delay) + frac_product(fc, cal) + frac_product(offset, delay) +
                      frac_product(offset, cal) + d * (delay + cal);
  const double angle = -2.0 * std::numbers::pi * frac;
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace

Violations Scene::check() const {
  Violations v;
  v.require(!rx_positions.empty(), "scene.rx_positions must be non-empty");
  for (const auto& c : clutter_points)
    v.require(std::isfinite(c.reflectivity) && c.reflectivity >= 0,
              "scene.clutter reflectivity must be >= 0");
  if (target) {
    v.require(target->body_radius_m > 0, "scene.target.body_radius_m must be > 0");
    v.require(target->reflectivity >= 0, "scene.target.reflectivity must be >= 0");
    v.require(std::isfinite(target->blockage_db), "scene.target.blockage_db must be finite");
  }
  return v;
}

std::vector<PropagationPath> build_paths(const Scene& scene, std::size_t link_index) {
  if (link_index >= scene.rx_positions.size())
    throw std::out_of_range("link index " + std::to_string(link_index) + " >= receiver count " +
                            std::to_string(scene.rx_positions.size()));
  const Point tx = scene.tx_position;
  const Point rx = scene.rx_positions[link_index];

  for (std::size_t k = 0; k < scene.rx_positions.size(); ++k)
    require_apart(tx, scene.rx_positions[k], "transmitter and receiver");
  for (const auto& c : scene.clutter_points) {
    require_apart(tx, c.position, "transmitter and clutter point");
    require_apart(rx, c.position, "receiver and clutter point");
  }
  if (scene.target) {
    require_apart(tx, scene.target->position, "transmitter and target");
    require_apart(rx, scene.target->position, "receiver and target");
  }

  double blockage_gain = 1.0;
  auto shadowed = [&](Point a, Point b) {
    return scene.target &&
           segment_point_distance(a, b, scene.target->position) <= scene.target->body_radius_m;
  };
  if (scene.target) blockage_gain = std::pow(10.0, -scene.target->blockage_db / 20.0);

  std::vector<PropagationPath> paths;
  paths.reserve(scene.clutter_points.size() + 2);

  const double los = distance(tx, rx);
  paths.push_back({Complex{(shadowed(tx, rx) ? blockage_gain : 1.0) / los, 0.0},
                   los / kSpeedOfLight, 0.0});

  for (const auto& c : scene.clutter_points) {
    const double d1 = distance(tx, c.position);
    const double d2 = distance(c.position, rx);
    double amp = c.reflectivity / (d1 * d2);
    if (shadowed(tx, c.position) || shadowed(c.position, rx)) amp *= blockage_gain;
    paths.push_back({Complex{amp, 0.0}, (d1 + d2) / kSpeedOfLight, 0.0});
  }

  if (scene.target) {
    const double d1 = distance(tx, scene.target->position);
    const double d2 = distance(scene.target->position, rx);
    paths.push_back({Complex{scene.target->reflectivity / (d1 * d2), 0.0},
                     (d1 + d2) / kSpeedOfLight, 0.0});
  }
  return paths;
}

FrequencySweep synthesize_sweep(std::span<const PropagationPath> paths, const SweepConfig& cfg,
                                std::uint64_t rng_seed, int link_id) {
  cfg.validate();
  if (paths.empty()) throw std::invalid_argument("synthesize_sweep: empty path set");

  const auto n = static_cast<std::size_t>(cfg.num_points);
  FrequencySweep sweep{std::vector<Complex>(n), cfg, link_id};
  std::vector<double> offsets(n);
  const double step = cfg.frequency_step_hz();
  for (std::size_t i = 0; i < n; ++i)
    offsets[i] = std::fma(static_cast<double>(i), step, -cfg.bandwidth_hz / 2);

  for (const auto& p : paths) {
    for (std::size_t i = 0; i < n; ++i)
      sweep.samples[i] += p.gain * unit_phasor(cfg.center_frequency_hz, offsets[i], p.doppler_hz, p.delay_s,
                                               cfg.calibration_delay_s);
  }

  if (cfg.noise_std > 0) {
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, cfg.noise_std / std::numbers::sqrt2);
    for (auto& x : sweep.samples) {
      const double re = normal(rng);
      const double im = normal(rng);
      x += Complex{re, im};
    }
  }
  return sweep;
}

std::vector<FrequencySweep> synthesize_scene_sweeps(const Scene& scene, const SweepConfig& cfg) {
  scene.check().throw_if_any();
  std::vector<FrequencySweep> out;
  out.reserve(scene.rx_positions.size());
  for (std::size_t k = 0; k < scene.rx_positions.size(); ++k) {
    const auto paths = build_paths(scene, k);
    out.push_back(synthesize_sweep(paths, cfg, derive_seed(scene.seed, {k}), static_cast<int>(k)));
  }
  return out;
}

Scene make_lab_scene(const LabLayout& layout, std::uint64_t seed) {
  Scene scene;
  scene.tx_position = layout.tx;
  scene.rx_positions = layout.rx;
  scene.seed = seed;
  scene.target = layout.target_model;

  std::mt19937_64 rng(derive_seed(seed, {0xC1u}));
  std::uniform_real_distribution<double> refl(layout.clutter_reflectivity_min,
                                              layout.clutter_reflectivity_max);
  std::uniform_real_distribution<double> ux(layout.room_min.x, layout.room_max.x);
  std::uniform_real_distribution<double> uy(layout.room_min.y, layout.room_max.y);
  for (int k = 0; k < layout.clutter_count; ++k) {
    Point p;
    switch (k % 4) {
      case 0: p = {layout.room_min.x, uy(rng)}; break;
      case 1: p = {layout.room_max.x, uy(rng)}; break;
      case 2: p = {ux(rng), layout.room_min.y}; break;
      default: p = {ux(rng), layout.room_max.y}; break;
    }
    scene.clutter_points.push_back({p, refl(rng)});
  }
  return scene;
}

}  // namespace cirsense
