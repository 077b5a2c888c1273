#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cirsense/config.hpp"
#include "cirsense/eval/report.hpp"

namespace cirsense {

/// Progress sink; the CLI prints to stderr, tests pass nothing.
using Log = std::function<void(const std::string&)>;

/// Generates the campaign and writes it to `path` (snapshot stamped alongside).
Dataset cmd_simulate(const RunConfig& cfg, const std::filesystem::path& path, const Log& log = {});

/// Builds a dataset from measured traces. `dir` holds one subdirectory per
/// measurement named `<bin>-target` or `<bin>-null`, each with one trace
/// file per receiver (sorted by name, matching cfg.receiver_ids).
Dataset cmd_import(const RunConfig& cfg, const std::filesystem::path& dir,
                   const std::filesystem::path& path, const Log& log = {});

/// Trains one model on the configured split's train/val bins and saves it.
void cmd_train(const RunConfig& cfg, const Dataset& data, eval::ModelKind kind, nn::Task task,
               const eval::LinkCombo& combo, const std::filesystem::path& checkpoint,
               const Log& log = {});

/// Scores saved checkpoints on the configured test bins.
std::vector<eval::EvalReport> cmd_eval_checkpoints(const RunConfig& cfg, const Dataset& data,
                                                   const std::vector<std::filesystem::path>& checkpoints);

/// Runs the configured suite (train and score every cell) on `data`.
std::vector<eval::EvalReport> cmd_eval(const RunConfig& cfg, const Dataset& data,
                                       const std::optional<std::filesystem::path>& checkpoint_dir,
                                       const Log& log = {});

/// Writes reports.csv, reports.json, error_cdf.svg and config.json into `dir`.
void write_reports(const std::vector<eval::EvalReport>& reports, const RunConfig& cfg,
                   const std::filesystem::path& dir);

/// simulate + eval + reports into cfg.out_dir.
std::vector<eval::EvalReport> cmd_reproduce(const RunConfig& cfg, const Log& log = {});

/// Writes the resolved configuration next to an artifact.
void stamp_snapshot(const RunConfig& cfg, const std::filesystem::path& dir);

}  // namespace cirsense
