#include "cirsense/eval/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cirsense/binary_io.hpp"
#include "cirsense/eval/baseline.hpp"
#include "cirsense/gbt/checkpoint.hpp"
#include "cirsense/nn/checkpoint.hpp"
#include "cirsense/seed.hpp"

namespace cirsense::eval {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kTypeA: return "typea";
    case ModelKind::kTypeB: return "typeb";
    case ModelKind::kTypeC: return "typec";
    case ModelKind::kBaseline: return "baseline";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  std::string t(s);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  t.erase(std::remove(t.begin(), t.end(), '-'), t.end());
  if (t == "typea" || t == "a") return ModelKind::kTypeA;
  if (t == "typeb" || t == "b") return ModelKind::kTypeB;
  if (t == "typec" || t == "c") return ModelKind::kTypeC;
  if (t == "baseline" || t == "knn") return ModelKind::kBaseline;
  throw std::invalid_argument("unknown model '" + std::string(s) + "'");
}

std::vector<ModelKind> parse_model_list(std::string_view text) {
  std::vector<ModelKind> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    auto item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      const auto k = parse_model_kind(item);
      if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    }
    start = end + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty model list");
  return out;
}

Violations ModelHyper::check() const {
  Violations v;
  v.merge(nn.check(), "nn.");
  v.merge(arch.check(), "nn.");
  v.merge(gbt.check(), "gbt.");
  if (grid_search) {
    v.require(!grid.n_estimators.empty() && !grid.max_depth.empty() && !grid.learning_rate.empty(),
              "gbt.grid: every hyperparameter list must be non-empty");
    for (int n : grid.n_estimators) v.require(n >= 1, "gbt.grid.n_estimators values must be >= 1");
    for (int d : grid.max_depth) v.require(d >= 1, "gbt.grid.max_depth values must be >= 1");
    for (double r : grid.learning_rate)
      v.require(r > 0 && r <= 1, "gbt.grid.learning_rate values must lie in (0, 1]");
  }
  return v;
}

nn::Tensor3 to_tensor(std::span<const SensingSample> samples) {
  if (samples.empty()) return {};
  const auto& layout = samples.front().features.layout;
  nn::Tensor3 t(static_cast<int>(samples.size()), layout.channel_count(), layout.length);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& f = samples[i].features;
    if (f.layout != layout || f.values.size() != layout.size())
      throw ShapeError("samples have inconsistent feature layouts");
    std::copy(f.values.begin(), f.values.end(),
              t.data.begin() + static_cast<std::ptrdiff_t>(t.offset(static_cast<int>(i), 0)));
  }
  return t;
}

namespace {

std::vector<SensingSample> task_samples(std::span<const SensingSample> samples, nn::Task task) {
  std::vector<SensingSample> out;
  for (const auto& s : samples) {
    if (task == nn::Task::kPosition && s.hypothesis != Hypothesis::kTarget) continue;
    if (task == nn::Task::kPosition && !s.position_m)
      throw std::invalid_argument("target sample without a position");
    out.push_back(s);
  }
  return out;
}

std::vector<double> labels(std::span<const SensingSample> samples, nn::Task task) {
  std::vector<double> y;
  for (const auto& s : samples) {
    if (task == nn::Task::kDetect) {
      y.push_back(s.hypothesis == Hypothesis::kTarget ? 1.0 : 0.0);
    } else {
      y.push_back(s.position_m->x);
      y.push_back(s.position_m->y);
    }
  }
  return y;
}

gbt::FeatureMatrix to_matrix(std::span<const SensingSample> samples) {
  if (samples.empty()) return {};
  const auto n = samples.front().features.values.size();
  gbt::FeatureMatrix m(static_cast<int>(samples.size()), static_cast<int>(n));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& v = samples[i].features.values;
    if (v.size() != n) throw ShapeError("samples have inconsistent feature sizes");
    std::copy(v.begin(), v.end(), m.values.begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  return m;
}

void require_layout(std::span<const SensingSample> samples, const ModelMeta& meta) {
  for (const auto& s : samples)
    if (s.link_ids != meta.receiver_ids || s.features.options != meta.features)
      throw ShapeError("samples do not match the model's receivers or feature encoding");
}

class NnTrained final : public TrainedModel {
 public:
  NnTrained(ModelKind kind, nn::NnCheckpoint ckpt) : kind_(kind), ckpt_(std::move(ckpt)) {}
  ModelKind kind() const override { return kind_; }
  nn::Task task() const override { return ckpt_.model.spec.task; }
  const ModelMeta& meta() const override { return ckpt_.meta; }

  std::vector<double> predict_detect(std::span<const SensingSample> samples) const override {
    if (task() != nn::Task::kDetect) throw std::logic_error("not a detection model");
    const auto out = raw(samples);
    std::vector<double> p(out.data.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = nn::sigmoid(out.data[i]);
    return p;
  }
  std::vector<Point> predict_position(std::span<const SensingSample> samples) const override {
    if (task() != nn::Task::kPosition) throw std::logic_error("not a positioning model");
    const auto out = raw(samples);
    std::vector<Point> p(static_cast<std::size_t>(out.batch));
    for (int i = 0; i < out.batch; ++i) p[static_cast<std::size_t>(i)] = {out.at(i, 0, 0), out.at(i, 1, 0)};
    return p;
  }
  void save(const std::filesystem::path& path) const override { nn::save_checkpoint(ckpt_, path); }

 private:
  nn::Tensor3 raw(std::span<const SensingSample> samples) const {
    require_layout(samples, ckpt_.meta);
    if (samples.empty()) return nn::Tensor3(0, task() == nn::Task::kDetect ? 1 : 2, 1);
    return nn::predict(ckpt_.model, to_tensor(samples));
  }
  ModelKind kind_;
  nn::NnCheckpoint ckpt_;
};

class GbtTrained final : public TrainedModel {
 public:
  explicit GbtTrained(gbt::GbtCheckpoint ckpt) : ckpt_(std::move(ckpt)) {}
  ModelKind kind() const override { return ModelKind::kTypeC; }
  nn::Task task() const override {
    return ckpt_.ensemble.objective == gbt::Objective::kLogistic ? nn::Task::kDetect : nn::Task::kPosition;
  }
  const ModelMeta& meta() const override { return ckpt_.meta; }

  std::vector<double> predict_detect(std::span<const SensingSample> samples) const override {
    if (task() != nn::Task::kDetect) throw std::logic_error("not a detection model");
    std::vector<double> p;
    for (double z : raw(samples)) p.push_back(nn::sigmoid(z));
    return p;
  }
  std::vector<Point> predict_position(std::span<const SensingSample> samples) const override {
    if (task() != nn::Task::kPosition) throw std::logic_error("not a positioning model");
    const auto z = raw(samples);
    std::vector<Point> p;
    for (std::size_t i = 0; i + 1 < z.size(); i += 2) p.push_back({z[i], z[i + 1]});
    return p;
  }
  void save(const std::filesystem::path& path) const override { gbt::save_checkpoint(ckpt_, path); }
  std::vector<gbt::GridScore> grid_table() const override { return ckpt_.grid_table; }

 private:
  std::vector<double> raw(std::span<const SensingSample> samples) const {
    require_layout(samples, ckpt_.meta);
    if (samples.empty()) return {};
    return ckpt_.ensemble.predict(to_matrix(samples));
  }
  gbt::GbtCheckpoint ckpt_;
};

class BaselineTrained final : public TrainedModel {
 public:
  explicit BaselineTrained(BaselineModel m) : m_(std::move(m)) {}
  ModelKind kind() const override { return ModelKind::kBaseline; }
  nn::Task task() const override { return m_.targets_only ? nn::Task::kPosition : nn::Task::kDetect; }
  const ModelMeta& meta() const override { return m_.meta; }

  std::vector<double> predict_detect(std::span<const SensingSample> samples) const override {
    if (task() != nn::Task::kDetect) throw std::logic_error("not a detection model");
    require_layout(samples, m_.meta);
    std::vector<double> p;
    for (const auto& s : samples)
      p.push_back(m_.hypotheses[nearest_index(m_, s.features)] == Hypothesis::kTarget ? 1.0 : 0.0);
    return p;
  }
  std::vector<Point> predict_position(std::span<const SensingSample> samples) const override {
    if (task() != nn::Task::kPosition) throw std::logic_error("not a positioning model");
    require_layout(samples, m_.meta);
    std::vector<Point> p;
    for (const auto& s : samples) p.push_back(baseline_predict(m_, s.features));
    return p;
  }
  void save(const std::filesystem::path& path) const override { save_baseline(m_, path); }

 private:
  BaselineModel m_;
};

}  // namespace

std::unique_ptr<TrainedModel> train_model(ModelKind kind, nn::Task task,
                                          std::span<const SensingSample> train,
                                          std::span<const SensingSample> val,
                                          const ModelHyper& hyper, const ModelMeta& meta,
                                          std::uint64_t seed) {
  hyper.check().throw_if_any();
  const auto tr = task_samples(train, task);
  const auto va = task_samples(val, task);
  if (tr.empty()) throw std::invalid_argument("no training samples for this task");
  require_layout(tr, meta);
  require_layout(va, meta);

  switch (kind) {
    case ModelKind::kTypeA:
    case ModelKind::kTypeB: {
      const auto& layout = tr.front().features.layout;
      const auto variant = kind == ModelKind::kTypeA ? nn::Variant::kTypeA : nn::Variant::kTypeB;
      const auto spec = nn::NetworkSpec::make_default(variant, task, layout.num_links,
                                                      layout.channels_per_link, layout.length, hyper.arch);
      nn::TrainHyper h = hyper.nn;
      h.seed = derive_seed(seed, {1});
      nn::LabeledBatch train_set{to_tensor(tr), labels(tr, task)};
      nn::LabeledBatch val_set{va.empty() ? nn::Tensor3(0, layout.channel_count(), layout.length) : to_tensor(va),
                               labels(va, task)};
      auto model = nn::train(spec, train_set, val_set, h);
      return std::make_unique<NnTrained>(kind, nn::NnCheckpoint{std::move(model), meta});
    }
    case ModelKind::kTypeC: {
      gbt::BoostConfig cfg = hyper.gbt;
      cfg.seed = derive_seed(seed, {2});
      const int outputs = task == nn::Task::kDetect ? 1 : 2;
      const auto objective = task == nn::Task::kDetect ? gbt::Objective::kLogistic : gbt::Objective::kSquared;
      gbt::GbtCheckpoint ckpt;
      ckpt.meta = meta;
      std::vector<SensingSample> fit = tr;
      if (hyper.grid_search && task == nn::Task::kPosition && !va.empty()) {
        const auto result = gbt::grid_search(to_matrix(tr), labels(tr, task), to_matrix(va),
                                             labels(va, task), outputs, hyper.grid, cfg);
        cfg = result.best;
        ckpt.grid_table = result.table;
        // the selected configuration is refit on train and validation together
        fit.insert(fit.end(), va.begin(), va.end());
      }
      ckpt.ensemble = gbt::fit_ensemble(to_matrix(fit), labels(fit, task), outputs, cfg, objective);
      return std::make_unique<GbtTrained>(std::move(ckpt));
    }
    case ModelKind::kBaseline: {
      // no hyperparameters, so validation samples join the fingerprint database
      std::vector<SensingSample> db = tr;
      db.insert(db.end(), va.begin(), va.end());
      auto m = fit_baseline(db, task == nn::Task::kPosition);
      m.meta = meta;
      return std::make_unique<BaselineTrained>(std::move(m));
    }
  }
  throw std::logic_error("unhandled model kind");
}

std::unique_ptr<TrainedModel> load_model(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  if (bytes.size() < 8) throw FormatError("not a model checkpoint: " + path.string());
  const std::string magic(bytes.begin(), bytes.begin() + 8);
  if (magic == "CIRSNNET") {
    auto c = nn::decode_checkpoint(bytes);
    const auto kind = c.model.spec.variant == nn::Variant::kTypeA ? ModelKind::kTypeA : ModelKind::kTypeB;
    return std::make_unique<NnTrained>(kind, std::move(c));
  }
  if (magic == "CIRSGBTE") return std::make_unique<GbtTrained>(gbt::decode_checkpoint(bytes));
  if (magic == "CIRSBASE") return std::make_unique<BaselineTrained>(decode_baseline(bytes));
  throw FormatError("unrecognized checkpoint magic in " + path.string());
}

}  // namespace cirsense::eval
