#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cirsense/dsp.hpp"
#include "cirsense/geometry.hpp"
#include "cirsense/sim.hpp"

namespace cirsense {

/// Row-major grid of square cells laid on the floor.
struct GridSpec {
  int n_cols = 21;
  int n_rows = 22;
  double cell_m = 0.2;
  Point origin{0.0, 0.0};
  /// When set, n_cols * n_rows must equal this count.
  std::optional<int> expected_points;

  int size() const { return n_cols * n_rows; }
  Violations check() const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Cell center of `index` (row-major). Throws std::out_of_range.
Point grid_to_position(const GridSpec& grid, int index);
/// Index of the cell containing `p`. Throws std::out_of_range outside the grid.
int position_to_grid(const GridSpec& grid, Point p);

enum class Hypothesis : std::uint8_t { kNull = 0, kTarget = 1 };

struct SensingSample {
  FeatureVector features;
  Hypothesis hypothesis = Hypothesis::kNull;
  /// Campaign bin the sample was recorded for. Null samples keep the bin of
  /// their paired target measurement so that splits never separate the pair.
  int bin = 0;
  /// Present iff hypothesis == kTarget.
  std::optional<int> grid_index;
  std::optional<Point> position_m;
  /// Receiver ids, one per feature link, e.g. {2, 3, 4}.
  std::vector<int> link_ids;
  std::uint64_t seed = 0;
};

struct CampaignSpec {
  GridSpec grid;
  /// Receivers, clutter and target body model. Target position is replaced per bin.
  Scene scene_template;
  SweepConfig sweep;
  FeatureOptions features;
  std::vector<int> receiver_ids{2, 3, 4};
  /// Noise realizations per (bin, hypothesis).
  int augmentation = 1;
  std::uint64_t seed = 0;

  Violations check() const;
};

/// One target sample (target at the cell center) and one null sample per
/// bin and augmentation draw, ordered by (bin, hypothesis, draw).
std::vector<SensingSample> generate_campaign(const CampaignSpec& spec);

/// Paired features for an explicit scene; used by generate_campaign.
FeatureVector scene_features(const Scene& scene, const SweepConfig& sweep,
                             const FeatureOptions& opts);

struct SplitSpec {
  std::vector<int> train_bins;
  std::vector<int> test_bins;
  double val_fraction = 0.3;
  std::uint64_t seed = 0;
};

/// Random bin partition with `n_test` test bins out of `grid_size`.
SplitSpec make_random_split(int grid_size, int n_test, double val_fraction, std::uint64_t seed);

struct CampaignSplit {
  std::vector<SensingSample> train;
  std::vector<SensingSample> val;
  std::vector<SensingSample> test;
  std::vector<int> train_bins;  // excludes val bins
  std::vector<int> val_bins;
  std::vector<int> test_bins;
};

/// Partitions by bin; val takes floor(val_fraction * |train_bins|) of the
/// train bins, chosen by `spec.seed`. Throws ConfigError on overlapping or
/// incomplete bin sets.
CampaignSplit split_campaign(const std::vector<SensingSample>& samples, const SplitSpec& spec,
                             int grid_size);

struct DatasetInfo {
  GridSpec grid;
  SweepConfig sweep;
  FeatureOptions features;
  FeatureLayout layout;
  std::vector<int> receiver_ids{2, 3, 4};
  std::uint64_t seed = 0;
  int augmentation = 1;
  /// Full run configuration the dataset was produced from (JSON text).
  std::string config_snapshot;
};

struct Dataset {
  DatasetInfo info;
  std::vector<SensingSample> samples;
};

Dataset make_dataset(const CampaignSpec& spec, std::string config_snapshot = {});

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

/// Binary layout documented in docs/file-formats.md.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_dataset(const Dataset& dataset);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);

/// Reads `frequency_hz, real, imag` text traces. `path` is either one file
/// (one link) or a directory whose regular files (sorted by name) are links.
std::vector<FrequencySweep> import_sweep_traces(const std::filesystem::path& path,
                                                const SweepConfig& cfg);
FrequencySweep parse_sweep_trace(std::string_view text, const SweepConfig& cfg, int link_id = 0);
std::string format_sweep_trace(const FrequencySweep& sweep);
void export_sweep_trace(const FrequencySweep& sweep, const std::filesystem::path& path);

}  // namespace cirsense
