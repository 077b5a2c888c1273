#pragma once

#include <cstdint>
#include <vector>

#include "cirsense/nn/network.hpp"
#include "cirsense/nn/optimizer.hpp"

namespace cirsense::nn {

struct TrainHyper {
  int epochs = 300;
  int batch_size = 32;
  double learning_rate = 1e-3;
  /// Epochs without validation improvement before stopping.
  int patience = 20;
  std::uint64_t seed = 0;

  Violations check() const;
  friend bool operator==(const TrainHyper&, const TrainHyper&) = default;
};

struct TrainingCurves {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = -1;
};

/// Inputs with labels: detect labels are 0/1 (one per item), position labels
/// are (x, y) pairs.
struct LabeledBatch {
  Tensor3 x;
  std::vector<double> y;
};

struct NnModel {
  NetworkSpec spec;
  std::vector<double> params;
  TrainHyper hyper;
  TrainingCurves curves;
};

/// Mini-batch Adam with per-epoch seeded shuffling. Keeps the parameters of
/// the epoch with the lowest validation loss (training loss when `val` is
/// empty). Throws DivergenceError on a non-finite loss.
NnModel train(const NetworkSpec& spec, const LabeledBatch& train_set, const LabeledBatch& val,
              const TrainHyper& hyper);

/// Raw network outputs for every item, evaluated in fixed-size chunks.
Tensor3 predict(const NnModel& model, const Tensor3& x);
Tensor3 predict(const Network& net, std::span<const double> params, const Tensor3& x);

/// Mean loss over a labeled set, evaluated in fixed-size chunks.
double evaluate_loss(const Network& net, std::span<const double> params, const LabeledBatch& data);

}  // namespace cirsense::nn
