#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cirsense/error.hpp"
#include "cirsense/nn/tensor.hpp"

namespace cirsense::nn {

enum class LayerKind { kConv1d, kRelu, kMaxPool, kFlatten, kDense };

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  int pool_size = 2;
  int pool_stride = 2;
  int out_units = 0;

  static LayerSpec conv(int out_channels, int kernel, int stride = 1, int padding = 0);
  static LayerSpec relu();
  static LayerSpec maxpool(int size, int stride);
  static LayerSpec flatten();
  static LayerSpec dense(int out_units);

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// TypeA: one pipeline over all link channels. TypeB: one pipeline per link,
/// flattened outputs concatenated before the fusion head.
enum class Variant { kTypeA, kTypeB };
enum class Task { kDetect, kPosition };
enum class Loss { kBinaryCrossEntropy, kMeanSquaredError };

std::string_view to_string(LayerKind k);
std::string_view to_string(Variant v);
std::string_view to_string(Task t);
std::string_view to_string(Loss l);
LayerKind parse_layer_kind(std::string_view s);
Variant parse_variant(std::string_view s);
Task parse_task(std::string_view s);
Loss parse_loss(std::string_view s);

/// Knobs of the default trunk: `blocks` x [conv(channels, kernel, pad kernel/2)
/// -> relu -> maxpool(pool, pool)] -> flatten, head dense(dense_units) -> relu.
struct Architecture {
  int blocks = 3;
  int channels = 32;
  int kernel = 5;
  int pool = 2;
  int dense_units = 64;

  Violations check() const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct NetworkSpec {
  Variant variant = Variant::kTypeA;
  int num_links = 1;
  int channels_per_link = 1;
  int input_length = 256;
  std::vector<LayerSpec> per_pipeline;
  /// Ends with dense(1) for detection or dense(2) for positioning.
  std::vector<LayerSpec> fusion_head;
  Task task = Task::kDetect;
  Loss loss = Loss::kBinaryCrossEntropy;

  int outputs() const { return task == Task::kDetect ? 1 : 2; }
  Violations check() const;

  /// 3 x [conv(32, k5, s1, p2) -> relu -> maxpool(2,2)] -> flatten, head dense(64) -> relu -> dense(out).
  static NetworkSpec make_default(Variant variant, Task task, int num_links, int channels_per_link,
                                  int input_length, const Architecture& arch = {});

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Shape bookkeeping of one layer once input sizes are known.
struct LayerPlan {
  LayerSpec spec;
  int in_channels = 0;
  int in_length = 0;
  int out_channels = 0;
  int out_length = 0;
  std::size_t weight_offset = 0;
  std::size_t weight_count = 0;
  std::size_t bias_offset = 0;
  std::size_t bias_count = 0;
  int fan_in = 0;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Compiled network: shapes and flat parameter layout. Parameters live
/// outside, so one Network can serve many parameter vectors and threads.
class Network {
 public:
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const noexcept { return spec_; }
  std::size_t parameter_count() const noexcept { return parameter_count_; }
  int pipeline_count() const { return static_cast<int>(pipelines_.size()); }
  const std::vector<LayerPlan>& pipeline_plan(int i) const { return pipelines_.at(static_cast<std::size_t>(i)); }
  const std::vector<LayerPlan>& head_plan() const { return head_; }

  /// Uniform He fan-in initialization, biases zero.
  std::vector<double> init_parameters(std::uint64_t seed) const;

  /// Input (batch, num_links * channels_per_link, input_length) -> (batch, outputs, 1).
  Tensor3 forward(std::span<const double> params, const Tensor3& input) const;

  /// Flattened output of each pipeline before fusion.
  std::vector<Tensor3> pipeline_outputs(std::span<const double> params, const Tensor3& input) const;

  /// Mean loss over the batch (MSE also averages over output coordinates).
  /// labels: batch * outputs values.
  double loss(std::span<const double> params, const Tensor3& input,
              std::span<const double> labels) const;
  LossAndGradient loss_and_gradient(std::span<const double> params, const Tensor3& input,
                                    std::span<const double> labels) const;

  /// Architecture fingerprint: every layer plan and the parameter layout.
  std::string describe() const;

 private:
  struct Trace;
  Tensor3 run(std::span<const double> params, const Tensor3& input, Trace* trace) const;
  void check_input(const Tensor3& input) const;

  NetworkSpec spec_;
  std::vector<std::vector<LayerPlan>> pipelines_;
  std::vector<LayerPlan> head_;
  std::size_t parameter_count_ = 0;
};

/// Loss of raw outputs against labels, with d(loss)/d(output).
double loss_value(Loss loss, const Tensor3& outputs, std::span<const double> labels,
                  Tensor3* grad_outputs);

double sigmoid(double z);

}  // namespace cirsense::nn
