#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cirsense/geometry.hpp"
#include "cirsense/sweep.hpp"

namespace cirsense {

/// One propagation path of Eq.-(1)-style sweep synthesis: X_i = sum a exp(-j2pi(f_i+d)tau).
struct PropagationPath {
  Complex gain{1.0, 0.0};
  double delay_s = 0.0;
  double doppler_hz = 0.0;
};

struct ClutterPoint {
  Point position;
  double reflectivity = 1.0;
};

/// Passive human target: a point reflector plus a disk that shadows every
/// path passing through it.
struct Target {
  Point position;
  double body_radius_m = 0.25;
  double reflectivity = 0.5;
  double blockage_db = 15.0;
};

struct Scene {
  Point tx_position;
  std::vector<Point> rx_positions;
  std::vector<ClutterPoint> clutter_points;
  std::optional<Target> target;
  std::uint64_t seed = 0;

  Violations check() const;
};

/// Paths for link `link_index` (Tx -> rx_positions[link_index]): LoS, one
/// single bounce per clutter point, then the target bounce if present.
/// Throws GeometryError for co-located nodes and std::out_of_range for a bad link.
std::vector<PropagationPath> build_paths(const Scene& scene, std::size_t link_index);

/// Literal sweep synthesis with circular complex Gaussian noise of std
/// cfg.noise_std (noise_std/sqrt(2) per component), seeded by `rng_seed`.
/// The calibration delay is added to every path delay.
FrequencySweep synthesize_sweep(std::span<const PropagationPath> paths, const SweepConfig& cfg,
                                std::uint64_t rng_seed, int link_id = 0);

/// One sweep per receiver. Link k draws its noise from derive_seed(scene.seed, {k}).
std::vector<FrequencySweep> synthesize_scene_sweeps(const Scene& scene, const SweepConfig& cfg);

/// Parameters of the default lab layout: room, node placement and the
/// random static clutter ring around the sensing grid.
struct LabLayout {
  Point tx{-0.6, -0.6};
  std::vector<Point> rx{{4.8, -0.6}, {4.8, 5.0}, {-0.6, 5.0}};
  /// Clutter reflectors are scattered on the walls of this rectangle.
  Point room_min{-1.5, -1.5};
  Point room_max{5.7, 6.2};
  int clutter_count = 12;
  double clutter_reflectivity_min = 0.3;
  double clutter_reflectivity_max = 1.0;
  Target target_model{};
};

/// Builds the clutter layout deterministically from `seed`. The returned
/// scene carries `layout.target_model` as its target template.
Scene make_lab_scene(const LabLayout& layout, std::uint64_t seed);

}  // namespace cirsense
