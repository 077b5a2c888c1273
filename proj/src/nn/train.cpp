#include "cirsense/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "cirsense/seed.hpp"

namespace cirsense::nn {

namespace {
constexpr int kEvalChunk = 64;

std::vector<double> label_slice(const std::vector<double>& y, std::span<const std::size_t> rows,
                                int outputs) {
  std::vector<double> out;
  out.reserve(rows.size() * static_cast<std::size_t>(outputs));
  for (auto r : rows)
    for (int k = 0; k < outputs; ++k) out.push_back(y[r * static_cast<std::size_t>(outputs) + k]);
  return out;
}
}  // namespace

Violations TrainHyper::check() const {
  Violations v;
  v.require(epochs >= 1, "train.epochs must be >= 1");
  v.require(batch_size >= 1, "train.batch_size must be >= 1");
  v.require(learning_rate > 0, "train.learning_rate must be > 0");
  v.require(patience >= 1, "train.patience must be >= 1");
  return v;
}

Tensor3 predict(const Network& net, std::span<const double> params, const Tensor3& x) {
  Tensor3 out(x.batch, net.spec().outputs(), 1);
  std::vector<std::size_t> rows;
  for (int start = 0; start < x.batch; start += kEvalChunk) {
    const int end = std::min(x.batch, start + kEvalChunk);
    rows.resize(static_cast<std::size_t>(end - start));
    std::iota(rows.begin(), rows.end(), static_cast<std::size_t>(start));
    const Tensor3 y = net.forward(params, gather(x, rows));
    std::copy(y.data.begin(), y.data.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>(out.offset(start, 0)));
  }
  return out;
}

Tensor3 predict(const NnModel& model, const Tensor3& x) {
  return predict(Network(model.spec), model.params, x);
}

double evaluate_loss(const Network& net, std::span<const double> params, const LabeledBatch& data) {
  if (data.x.batch == 0) return 0.0;
  const Tensor3 out = predict(net, params, data.x);
  return loss_value(net.spec().loss, out, data.y, nullptr);
}

NnModel train(const NetworkSpec& spec, const LabeledBatch& train_set, const LabeledBatch& val,
              const TrainHyper& hyper) {
  hyper.check().throw_if_any();
  const Network net(spec);
  const int outputs = spec.outputs();
  if (train_set.x.batch < 1) throw ShapeError("train: empty training set");
  if (train_set.y.size() != static_cast<std::size_t>(train_set.x.batch * outputs) ||
      val.y.size() != static_cast<std::size_t>(val.x.batch * outputs))
    throw ShapeError("train: label count does not match items x outputs");

  NnModel model{spec, net.init_parameters(hyper.seed), hyper, {}};

  // Start the regression output at the label mean.
  if (spec.task == Task::kPosition) {
    const auto& last = net.head_plan().back();
    for (int k = 0; k < outputs; ++k) {
      double mean = 0.0;
      for (int i = 0; i < train_set.x.batch; ++i)
        mean += train_set.y[static_cast<std::size_t>(i * outputs + k)];
      model.params[last.bias_offset + static_cast<std::size_t>(k)] = mean / train_set.x.batch;
    }
  }

  OptimizerState opt;
  opt.learning_rate = hyper.learning_rate;
  opt.check().throw_if_any();

  std::vector<double> best = model.params;
  double best_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::vector<std::size_t> order(static_cast<std::size_t>(train_set.x.batch));
  int step = 0;

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(hyper.seed, {0xE0u, static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(hyper.batch_size));
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const auto lg = net.loss_and_gradient(model.params, gather(train_set.x, rows),
                                            label_slice(train_set.y, rows, outputs));
      if (!std::isfinite(lg.loss))
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + " step " +
                                  std::to_string(step) + ": loss is " + std::to_string(lg.loss),
                              epoch, step);
      adam_step(opt, model.params, lg.gradient);
      epoch_loss += lg.loss * static_cast<double>(rows.size());
      ++step;
    }
    epoch_loss /= static_cast<double>(order.size());
    model.curves.train_loss.push_back(epoch_loss);

    double monitored = epoch_loss;
    if (val.x.batch > 0) {
      monitored = evaluate_loss(net, model.params, val);
      if (!std::isfinite(monitored))
        throw DivergenceError("validation loss diverged at epoch " + std::to_string(epoch), epoch, step);
      model.curves.val_loss.push_back(monitored);
    }
    if (monitored < best_loss) {
      best_loss = monitored;
      best = model.params;
      model.curves.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= hyper.patience) {
      break;
    }
  }
  model.params = std::move(best);
  return model;
}

}  // namespace cirsense::nn
