#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cirsense/eval/combo.hpp"
#include "cirsense/eval/metrics.hpp"
#include "cirsense/eval/model.hpp"

namespace cirsense::eval {

struct EvalReport {
  nn::Task task = nn::Task::kPosition;
  std::string model_id;
  LinkCombo combo;
  std::optional<double> accuracy;
  std::optional<double> mean_error_m;
  Cdf error_cdf;
  int test_count = 0;
  std::string config_snapshot;
  std::uint64_t seed = 0;
  /// Set when the cell failed; metrics are then absent.
  std::optional<std::string> error;
  /// Bins the cell was fit on (train and validation) and scored on.
  std::vector<int> fit_bins;
  std::vector<int> test_bins;
  std::vector<gbt::GridScore> grid_table;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct Experiment {
  nn::Task task = nn::Task::kPosition;
  std::vector<ModelKind> models;
  std::vector<LinkCombo> combos;
};

struct SuiteSpec {
  std::vector<Experiment> experiments;
  SplitSpec split;
  ModelHyper hyper;
  std::uint64_t seed = 0;
  std::string config_snapshot;
  /// When set, every trained model is saved as
  /// <dir>/<task>-<model>-<combo>.ckpt.
  std::optional<std::filesystem::path> checkpoint_dir;
};

/// Runs every (experiment, model, combo) cell: restricts features to the
/// combo, trains on the split's train/val bins and scores the test bins.
/// A failing cell yields a report with `error` set. Report order follows the
/// experiment order regardless of scheduling.
std::vector<EvalReport> run_experiment_suite(const Dataset& dataset, const SuiteSpec& spec);

/// Scores an already trained model on `samples` (restricted to the model's
/// receivers using `available_ids`, the dataset link order).
EvalReport evaluate_model(const TrainedModel& model, std::span<const SensingSample> samples,
                          std::span<const int> available_ids);

/// Seed of one suite cell.
std::uint64_t cell_seed(std::uint64_t seed, nn::Task task, ModelKind kind, const LinkCombo& combo);

/// Throws Error naming the first cell whose fit bins intersect its test bins.
void check_split_hygiene(const std::vector<EvalReport>& reports);

}  // namespace cirsense::eval
