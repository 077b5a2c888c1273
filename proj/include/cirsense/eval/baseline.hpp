#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "cirsense/dataset.hpp"
#include "cirsense/model_meta.hpp"

namespace cirsense::eval {

/// Fingerprint database for exact 1-nearest-neighbor lookup.
struct BaselineModel {
  FeatureLayout layout;
  std::vector<std::vector<double>> features;
  std::vector<Hypothesis> hypotheses;
  /// grid index and position; -1 / (0, 0) for null samples.
  std::vector<int> grid_indices;
  std::vector<Point> positions;
  /// Database of target samples only (positioning) rather than both hypotheses.
  bool targets_only = true;
  ModelMeta meta;
};

/// `targets_only` keeps just the target samples (positioning database).
BaselineModel fit_baseline(std::span<const SensingSample> train, bool targets_only);

/// Index of the nearest database entry under L2 over the flattened features;
/// ties go to the lowest grid index, then the earliest entry.
/// Throws ShapeError on a layout mismatch or std::invalid_argument when empty.
std::size_t nearest_index(const BaselineModel& model, const FeatureVector& query);

Point baseline_predict(const BaselineModel& model, const FeatureVector& query);
Point baseline_predict(std::span<const SensingSample> train, const FeatureVector& query);

/// Layout: "CIRSBASE", u32 version, u64 len + JSON header, u32 crc32(header),
/// u64 entries, per entry u8 hypothesis, i32 grid index, f64 x, f64 y,
/// f64 features; u32 crc32 of the entry section.
void save_baseline(const BaselineModel& model, const std::filesystem::path& path);
BaselineModel load_baseline(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_baseline(const BaselineModel& model);
BaselineModel decode_baseline(std::span<const std::uint8_t> bytes);

}  // namespace cirsense::eval
