#include "cirsense/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cirsense/nn/layers.hpp"
#include "cirsense/seed.hpp"

namespace cirsense::nn {

LayerSpec LayerSpec::conv(int out_channels, int kernel, int stride, int padding) {
  LayerSpec l;
  l.kind = LayerKind::kConv1d;
  l.out_channels = out_channels;
  l.kernel = kernel;
  l.stride = stride;
  l.padding = padding;
  return l;
}

LayerSpec LayerSpec::relu() { return LayerSpec{}; }

LayerSpec LayerSpec::maxpool(int size, int stride) {
  LayerSpec l;
  l.kind = LayerKind::kMaxPool;
  l.pool_size = size;
  l.pool_stride = stride;
  return l;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec l;
  l.kind = LayerKind::kFlatten;
  return l;
}

LayerSpec LayerSpec::dense(int out_units) {
  LayerSpec l;
  l.kind = LayerKind::kDense;
  l.out_units = out_units;
  return l;
}

std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::kConv1d: return "conv1d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool: return "maxpool";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kDense: return "dense";
  }
  return "?";
}

std::string_view to_string(Variant v) { return v == Variant::kTypeA ? "typea" : "typeb"; }
std::string_view to_string(Task t) { return t == Task::kDetect ? "detect" : "position"; }
std::string_view to_string(Loss l) {
  return l == Loss::kBinaryCrossEntropy ? "binary-cross-entropy" : "mean-squared-error";
}

LayerKind parse_layer_kind(std::string_view s) {
  for (auto k : {LayerKind::kConv1d, LayerKind::kRelu, LayerKind::kMaxPool, LayerKind::kFlatten,
                 LayerKind::kDense})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown layer kind '" + std::string(s) + "'");
}

Variant parse_variant(std::string_view s) {
  if (s == "typea") return Variant::kTypeA;
  if (s == "typeb") return Variant::kTypeB;
  throw std::invalid_argument("unknown network variant '" + std::string(s) + "'");
}

Task parse_task(std::string_view s) {
  if (s == "detect") return Task::kDetect;
  if (s == "position") return Task::kPosition;
  throw std::invalid_argument("unknown task '" + std::string(s) + "'");
}

Loss parse_loss(std::string_view s) {
  if (s == "binary-cross-entropy") return Loss::kBinaryCrossEntropy;
  if (s == "mean-squared-error") return Loss::kMeanSquaredError;
  throw std::invalid_argument("unknown loss '" + std::string(s) + "'");
}

Violations Architecture::check() const {
  Violations v;
  v.require(blocks >= 0, "architecture.blocks must be >= 0");
  v.require(channels >= 1, "architecture.channels must be >= 1");
  v.require(kernel >= 1 && kernel % 2 == 1, "architecture.kernel must be odd and >= 1");
  v.require(pool >= 1, "architecture.pool must be >= 1");
  v.require(dense_units >= 1, "architecture.dense_units must be >= 1");
  return v;
}

NetworkSpec NetworkSpec::make_default(Variant variant, Task task, int num_links,
                                      int channels_per_link, int input_length,
                                      const Architecture& arch) {
  arch.check().throw_if_any();
  NetworkSpec s;
  s.variant = variant;
  s.task = task;
  s.loss = task == Task::kDetect ? Loss::kBinaryCrossEntropy : Loss::kMeanSquaredError;
  s.num_links = num_links;
  s.channels_per_link = channels_per_link;
  s.input_length = input_length;
  for (int i = 0; i < arch.blocks; ++i) {
    s.per_pipeline.push_back(LayerSpec::conv(arch.channels, arch.kernel, 1, arch.kernel / 2));
    s.per_pipeline.push_back(LayerSpec::relu());
    s.per_pipeline.push_back(LayerSpec::maxpool(arch.pool, arch.pool));
  }
  s.per_pipeline.push_back(LayerSpec::flatten());
  s.fusion_head = {LayerSpec::dense(arch.dense_units), LayerSpec::relu(), LayerSpec::dense(s.outputs())};
  return s;
}

namespace {

void check_layer(const LayerSpec& l, const std::string& where, Violations& v) {
  switch (l.kind) {
    case LayerKind::kConv1d:
      v.require(l.out_channels >= 1, where + ": conv out_channels must be >= 1");
      v.require(l.kernel >= 1, where + ": conv kernel must be >= 1");
      v.require(l.stride >= 1, where + ": conv stride must be >= 1");
      v.require(l.padding >= 0, where + ": conv padding must be >= 0");
      break;
    case LayerKind::kMaxPool:
      v.require(l.pool_size >= 1, where + ": pool size must be >= 1");
      v.require(l.pool_stride >= 1, where + ": pool stride must be >= 1");
      break;
    case LayerKind::kDense:
      v.require(l.out_units >= 1, where + ": dense out_units must be >= 1");
      break;
    default:
      break;
  }
}

// Fills shapes and parameter offsets; returns false (with a violation) when a
// layer would produce an empty output.
bool plan_layers(const std::vector<LayerSpec>& layers, int channels, int length,
                 std::size_t& offset, std::vector<LayerPlan>& out, const std::string& where,
                 Violations& v) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    LayerPlan p;
    p.spec = l;
    p.in_channels = channels;
    p.in_length = length;
    switch (l.kind) {
      case LayerKind::kConv1d:
        p.out_channels = l.out_channels;
        p.out_length = conv1d_output_length(length, l.kernel, l.stride, l.padding);
        p.fan_in = channels * l.kernel;
        p.weight_count = static_cast<std::size_t>(l.out_channels) * channels * l.kernel;
        p.bias_count = static_cast<std::size_t>(l.out_channels);
        break;
      case LayerKind::kRelu:
        p.out_channels = channels;
        p.out_length = length;
        break;
      case LayerKind::kMaxPool:
        p.out_channels = channels;
        p.out_length = maxpool_output_length(length, l.pool_size, l.pool_stride);
        break;
      case LayerKind::kFlatten:
        p.out_channels = channels * length;
        p.out_length = 1;
        break;
      case LayerKind::kDense:
        p.out_channels = l.out_units;
        p.out_length = 1;
        p.fan_in = channels * length;
        p.weight_count = static_cast<std::size_t>(l.out_units) * channels * length;
        p.bias_count = static_cast<std::size_t>(l.out_units);
        break;
    }
    if (p.out_length < 1 || p.out_channels < 1) {
      v.require(false, where + " layer " + std::to_string(i) + " (" +
                           std::string(to_string(l.kind)) + "): output would be empty for input length " +
                           std::to_string(length));
      return false;
    }
    p.weight_offset = offset;
    offset += p.weight_count;
    p.bias_offset = offset;
    offset += p.bias_count;
    out.push_back(p);
    channels = p.out_channels;
    length = p.out_length;
  }
  return true;
}

}  // namespace

Violations NetworkSpec::check() const {
  Violations v;
  v.require(num_links >= 1 && num_links <= 3, "network.num_links must be in [1, 3]");
  v.require(channels_per_link >= 1, "network.channels_per_link must be >= 1");
  v.require(input_length >= 1, "network.input_length must be >= 1");
  v.require(!per_pipeline.empty(), "network.per_pipeline must not be empty");
  v.require(!fusion_head.empty(), "network.fusion_head must not be empty");
  for (std::size_t i = 0; i < per_pipeline.size(); ++i)
    check_layer(per_pipeline[i], "pipeline layer " + std::to_string(i), v);
  for (std::size_t i = 0; i < fusion_head.size(); ++i)
    check_layer(fusion_head[i], "head layer " + std::to_string(i), v);
  if (!fusion_head.empty()) {
    const auto& last = fusion_head.back();
    v.require(last.kind == LayerKind::kDense && last.out_units == outputs(),
              std::string("network head must end with dense(") + std::to_string(outputs()) + ") for task " +
                  std::string(to_string(task)));
  }
  v.require((task == Task::kDetect) == (loss == Loss::kBinaryCrossEntropy),
            "network.loss must be binary-cross-entropy for detect and mean-squared-error for position");
  return v;
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  Violations v = spec_.check();
  v.throw_if_any();
  const int pipelines = spec_.variant == Variant::kTypeA ? 1 : spec_.num_links;
  const int in_channels = spec_.variant == Variant::kTypeA ? spec_.num_links * spec_.channels_per_link
                                                           : spec_.channels_per_link;
  std::size_t offset = 0;
  int fused = 0;
  for (int p = 0; p < pipelines; ++p) {
    std::vector<LayerPlan> plan;
    if (plan_layers(spec_.per_pipeline, in_channels, spec_.input_length, offset, plan,
                    "pipeline " + std::to_string(p), v)) {
      fused += plan.back().out_channels * plan.back().out_length;
    }
    pipelines_.push_back(std::move(plan));
  }
  v.throw_if_any();
  plan_layers(spec_.fusion_head, fused, 1, offset, head_, "head", v);
  v.throw_if_any();
  parameter_count_ = offset;
}

std::vector<double> Network::init_parameters(std::uint64_t seed) const {
  std::vector<double> params(parameter_count_, 0.0);
  std::mt19937_64 rng(derive_seed(seed, {0x1A17u}));
  auto init = [&](const LayerPlan& p) {
    if (p.weight_count == 0) return;
    const double limit = std::sqrt(6.0 / static_cast<double>(p.fan_in));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t i = 0; i < p.weight_count; ++i) params[p.weight_offset + i] = u(rng);
  };
  for (const auto& pipe : pipelines_)
    for (const auto& p : pipe) init(p);
  for (const auto& p : head_) init(p);
  return params;
}

struct Network::Trace {
  struct Step {
    Tensor3 input;
    std::vector<int> argmax;
  };
  std::vector<std::vector<Step>> pipelines;
  std::vector<Tensor3> pipeline_outputs;
  std::vector<Step> head;
  Tensor3 fused;
};

namespace {

Tensor3 apply(const LayerPlan& p, std::span<const double> params, const Tensor3& x,
              std::vector<int>* argmax) {
  const auto w = params.subspan(p.weight_offset, p.weight_count);
  const auto b = params.subspan(p.bias_offset, p.bias_count);
  switch (p.spec.kind) {
    case LayerKind::kConv1d:
      return conv1d_forward(x, w, b, p.spec.out_channels, p.spec.kernel, p.spec.stride, p.spec.padding);
    case LayerKind::kRelu:
      return relu_forward(x);
    case LayerKind::kMaxPool: {
      auto r = maxpool_forward(x, p.spec.pool_size, p.spec.pool_stride);
      if (argmax) *argmax = std::move(r.argmax);
      return std::move(r.output);
    }
    case LayerKind::kFlatten: {
      Tensor3 y = x;
      y.channels = x.channels * x.length;
      y.length = 1;
      return y;
    }
    case LayerKind::kDense:
      return dense_forward(x, w, b, p.spec.out_units);
  }
  throw std::logic_error("unknown layer kind");
}

Tensor3 unapply(const LayerPlan& p, std::span<const double> params, const Tensor3& x,
                const std::vector<int>& argmax, const Tensor3& grad_out, std::span<double> grad) {
  const auto w = params.subspan(p.weight_offset, p.weight_count);
  const auto gw = grad.subspan(p.weight_offset, p.weight_count);
  const auto gb = grad.subspan(p.bias_offset, p.bias_count);
  Tensor3 gx;
  switch (p.spec.kind) {
    case LayerKind::kConv1d:
      conv1d_backward(x, w, grad_out, p.spec.kernel, p.spec.stride, p.spec.padding, gx, gw, gb);
      return gx;
    case LayerKind::kRelu:
      return relu_backward(x, grad_out);
    case LayerKind::kMaxPool:
      return maxpool_backward(grad_out, argmax, x.length);
    case LayerKind::kFlatten:
      gx = grad_out;
      gx.channels = x.channels;
      gx.length = x.length;
      return gx;
    case LayerKind::kDense:
      dense_backward(x, w, grad_out, gx, gw, gb);
      return gx;
  }
  throw std::logic_error("unknown layer kind");
}

}  // namespace

void Network::check_input(const Tensor3& input) const {
  const int expected = spec_.num_links * spec_.channels_per_link;
  if (input.channels != expected || input.length != spec_.input_length ||
      input.size() != static_cast<std::size_t>(input.batch) * expected * input.length)
    throw ShapeError("network input shape (" + std::to_string(input.batch) + ", " +
                     std::to_string(input.channels) + ", " + std::to_string(input.length) +
                     ") does not match spec (*, " + std::to_string(expected) + ", " +
                     std::to_string(spec_.input_length) + ")");
}

Tensor3 Network::run(std::span<const double> params, const Tensor3& input, Trace* trace) const {
  check_input(input);
  if (params.size() != parameter_count_)
    throw ShapeError("parameter vector has " + std::to_string(params.size()) + " values, network needs " +
                     std::to_string(parameter_count_));

  std::vector<Tensor3> outs;
  if (trace) trace->pipelines.resize(pipelines_.size());
  for (std::size_t p = 0; p < pipelines_.size(); ++p) {
    Tensor3 x = pipelines_.size() == 1
                    ? input
                    : slice_channels(input, static_cast<int>(p) * spec_.channels_per_link,
                                     spec_.channels_per_link);
    for (const auto& layer : pipelines_[p]) {
      std::vector<int> argmax;
      Tensor3 y = apply(layer, params, x, trace ? &argmax : nullptr);
      if (trace) trace->pipelines[p].push_back({std::move(x), std::move(argmax)});
      x = std::move(y);
    }
    outs.push_back(std::move(x));
  }

  int fused_features = 0;
  for (const auto& o : outs) fused_features += o.channels * o.length;
  Tensor3 fused(input.batch, fused_features, 1);
  for (int b = 0; b < input.batch; ++b) {
    auto dst = fused.data.begin() + static_cast<std::ptrdiff_t>(fused.offset(b, 0));
    for (const auto& o : outs) {
      const auto src = o.item(b);
      dst = std::copy(src.begin(), src.end(), dst);
    }
  }
  if (trace) trace->pipeline_outputs = std::move(outs);

  Tensor3 x = std::move(fused);
  for (const auto& layer : head_) {
    std::vector<int> argmax;
    Tensor3 y = apply(layer, params, x, trace ? &argmax : nullptr);
    if (trace) trace->head.push_back({std::move(x), std::move(argmax)});
    x = std::move(y);
  }
  return x;
}

Tensor3 Network::forward(std::span<const double> params, const Tensor3& input) const {
  return run(params, input, nullptr);
}

std::vector<Tensor3> Network::pipeline_outputs(std::span<const double> params,
                                               const Tensor3& input) const {
  Trace trace;
  run(params, input, &trace);
  return std::move(trace.pipeline_outputs);
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double loss_value(Loss loss, const Tensor3& outputs, std::span<const double> labels,
                  Tensor3* grad_outputs) {
  if (labels.size() != outputs.size())
    throw ShapeError("labels have " + std::to_string(labels.size()) + " values, outputs " +
                     std::to_string(outputs.size()));
  if (grad_outputs) *grad_outputs = Tensor3(outputs.batch, outputs.channels, outputs.length);
  const double n = static_cast<double>(outputs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double z = outputs.data[i];
    const double y = labels[i];
    if (loss == Loss::kBinaryCrossEntropy) {
      total += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
      if (grad_outputs) grad_outputs->data[i] = (sigmoid(z) - y) / n;
    } else {
      const double d = z - y;
      total += d * d;
      if (grad_outputs) grad_outputs->data[i] = 2.0 * d / n;
    }
  }
  return total / n;
}

double Network::loss(std::span<const double> params, const Tensor3& input,
                     std::span<const double> labels) const {
  return loss_value(spec_.loss, forward(params, input), labels, nullptr);
}

LossAndGradient Network::loss_and_gradient(std::span<const double> params, const Tensor3& input,
                                           std::span<const double> labels) const {
  Trace trace;
  const Tensor3 out = run(params, input, &trace);
  LossAndGradient r;
  r.gradient.assign(parameter_count_, 0.0);
  Tensor3 g;
  r.loss = loss_value(spec_.loss, out, labels, &g);

  for (std::size_t i = head_.size(); i-- > 0;)
    g = unapply(head_[i], params, trace.head[i].input, trace.head[i].argmax, g, r.gradient);

  // g is (batch, fused, 1); hand each pipeline its slice.
  int start = 0;
  for (std::size_t p = 0; p < pipelines_.size(); ++p) {
    const Tensor3& po = trace.pipeline_outputs[p];
    const int feats = po.channels * po.length;
    Tensor3 gp(po.batch, po.channels, po.length);
    for (int b = 0; b < po.batch; ++b) {
      const double* src = g.data.data() + g.offset(b, 0) + start;
      std::copy_n(src, feats, gp.data.begin() + static_cast<std::ptrdiff_t>(gp.offset(b, 0)));
    }
    start += feats;
    const auto& plan = pipelines_[p];
    for (std::size_t i = plan.size(); i-- > 0;)
      gp = unapply(plan[i], params, trace.pipelines[p][i].input, trace.pipelines[p][i].argmax, gp,
                   r.gradient);
  }
  return r;
}

std::string Network::describe() const {
  std::ostringstream os;
  auto dump = [&](const std::vector<LayerPlan>& plan) {
    for (const auto& p : plan)
      os << to_string(p.spec.kind) << '(' << p.in_channels << 'x' << p.in_length << "->"
         << p.out_channels << 'x' << p.out_length << ",w=" << p.weight_count << ",b=" << p.bias_count
         << ") ";
  };
  for (std::size_t i = 0; i < pipelines_.size(); ++i) {
    os << "pipeline" << i << ": ";
    dump(pipelines_[i]);
    os << '\n';
  }
  os << "head: ";
  dump(head_);
  os << "\nparameters: " << parameter_count_ << '\n';
  return os.str();
}

}  // namespace cirsense::nn
