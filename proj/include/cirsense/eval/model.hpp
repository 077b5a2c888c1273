#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cirsense/dataset.hpp"
#include "cirsense/gbt/ensemble.hpp"
#include "cirsense/model_meta.hpp"
#include "cirsense/nn/train.hpp"

namespace cirsense::eval {

enum class ModelKind { kTypeA, kTypeB, kTypeC, kBaseline };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);
std::vector<ModelKind> parse_model_list(std::string_view comma_separated);

struct ModelHyper {
  nn::TrainHyper nn;
  nn::Architecture arch;
  gbt::BoostConfig gbt;
  gbt::HyperGrid grid;
  /// When false Type-C trains `gbt` as is (no validation search).
  bool grid_search = true;

  Violations check() const;
  friend bool operator==(const ModelHyper&, const ModelHyper&) = default;
};

/// A trained detector or position estimator bound to its link selection.
class TrainedModel {
 public:
  virtual ~TrainedModel() = default;
  virtual ModelKind kind() const = 0;
  virtual nn::Task task() const = 0;
  virtual const ModelMeta& meta() const = 0;
  /// Probability of the target hypothesis (detect task).
  virtual std::vector<double> predict_detect(std::span<const SensingSample> samples) const = 0;
  /// Position in meters (position task).
  virtual std::vector<Point> predict_position(std::span<const SensingSample> samples) const = 0;
  virtual void save(const std::filesystem::path& path) const = 0;
  /// Grid-search table for Type-C; empty otherwise.
  virtual std::vector<gbt::GridScore> grid_table() const { return {}; }
};

/// Trains on `train` (with `val` for early stopping / model selection).
/// Samples must already be restricted to meta.receiver_ids. Detection uses
/// every sample; positioning uses only target samples. Seeds derive from
/// `seed`.
std::unique_ptr<TrainedModel> train_model(ModelKind kind, nn::Task task,
                                          std::span<const SensingSample> train,
                                          std::span<const SensingSample> val,
                                          const ModelHyper& hyper, const ModelMeta& meta,
                                          std::uint64_t seed);

/// Loads any checkpoint written by TrainedModel::save (dispatch on magic).
std::unique_ptr<TrainedModel> load_model(const std::filesystem::path& path);

/// Flattened link-major features as a network input batch.
nn::Tensor3 to_tensor(std::span<const SensingSample> samples);

}  // namespace cirsense::eval
