#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cirsense/dataset.hpp"
#include "cirsense/eval/suite.hpp"

namespace cirsense {

/// How test bins are chosen: an explicit list, or `test_count` random bins.
struct SplitConfig {
  int test_count = 125;
  double val_fraction = 0.3;
  /// When non-empty, these bins form the test set and test_count is ignored.
  std::vector<int> test_bins;

  friend bool operator==(const SplitConfig&, const SplitConfig&) = default;
};

/// Everything a run needs. Files use JSON; see docs/file-formats.md.
struct RunConfig {
  std::uint64_t seed = 7;
  std::string out_dir = "out";
  SweepConfig sweep;
  GridSpec grid;
  LabLayout scene;
  /// Seed of the clutter layout (kept apart from `seed` so the room stays put).
  std::uint64_t scene_seed = 5;
  FeatureOptions features;
  std::vector<int> receiver_ids{2, 3, 4};
  int augmentation = 1;
  SplitConfig split;
  eval::ModelHyper hyper;
  std::vector<eval::Experiment> experiments;

  RunConfig();

  /// Every violated invariant, prefixed with its key path.
  Violations check() const;

  CampaignSpec campaign() const;
  SplitSpec split_spec() const;
  eval::SuiteSpec suite() const;
  /// Canonical JSON text of the resolved configuration.
  std::string snapshot() const;
};

nlohmann::json config_to_json(const RunConfig& c);
/// Starts from defaults and applies `j`. Unknown keys, wrong types and
/// invariant violations are all collected into one ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::string_view text);

/// "21x22" style grid sizes.
std::pair<int, int> parse_grid_size(std::string_view text);

}  // namespace cirsense
