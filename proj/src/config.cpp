#include "cirsense/config.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "cirsense/binary_io.hpp"
#include "cirsense/seed.hpp"
#include "cirsense/serialization.hpp"

namespace cirsense {

namespace {

// Derivation tags for the sub-seeds of a run.
constexpr std::uint64_t kCampaignTag = 1;
constexpr std::uint64_t kSplitTag = 2;
constexpr std::uint64_t kSuiteTag = 3;

std::vector<eval::Experiment> default_experiments() {
  using eval::ModelKind;
  const std::vector<int> rx{2, 3, 4};
  eval::Experiment detect{nn::Task::kDetect, {ModelKind::kTypeA}, eval::all_combos(rx)};
  eval::Experiment position{nn::Task::kPosition,
                            {ModelKind::kTypeA, ModelKind::kTypeB, ModelKind::kTypeC, ModelKind::kBaseline},
                            {eval::LinkCombo{{2}}, eval::LinkCombo{{2, 3, 4}}}};
  return {detect, position};
}

json hyper_json(const eval::ModelHyper& h) {
  return {{"nn",
           {{"epochs", h.nn.epochs},
            {"batch_size", h.nn.batch_size},
            {"learning_rate", h.nn.learning_rate},
            {"patience", h.nn.patience},
            {"blocks", h.arch.blocks},
            {"channels", h.arch.channels},
            {"kernel", h.arch.kernel},
            {"pool", h.arch.pool},
            {"dense_units", h.arch.dense_units}}},
          {"gbt",
           {{"n_estimators", h.gbt.n_estimators},
            {"max_depth", h.gbt.max_depth},
            {"learning_rate", h.gbt.learning_rate},
            {"lambda", h.gbt.lambda},
            {"gamma", h.gbt.gamma},
            {"n_quantile_candidates", h.gbt.n_quantile_candidates},
            {"subsample", h.gbt.subsample},
            {"grid_search", h.grid_search},
            {"grid",
             {{"n_estimators", h.grid.n_estimators},
              {"max_depth", h.grid.max_depth},
              {"learning_rate", h.grid.learning_rate}}}}}};
}

/// Collects problems while walking a JSON document.
class Walker {
 public:
  explicit Walker(Violations& v) : v_(v) {}

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    v_.require(false, path + ": expected an object");
    return false;
  }

  void keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& [k, _] : j.items())
      v_.require(std::find(allowed.begin(), allowed.end(), k) != allowed.end(),
                 (path.empty() ? "" : path + ".") + k + ": unknown key");
  }

  template <class T>
  void read(const json& j, const std::string& path, std::string_view key, T& out) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
      out = it->template get<T>();
    } catch (const std::exception& e) {
      v_.require(false, (path.empty() ? "" : path + ".") + std::string(key) + ": " + brief(e));
    }
  }

  template <class F>
  void guard(const std::string& where, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      v_.require(false, where + ": " + brief(e));
    }
  }

 private:
  static std::string brief(const std::exception& e) {
    std::string s = e.what();
    // nlohmann prefixes messages with "[json.exception.type_error.302] "
    if (const auto p = s.find("] "); s.rfind("[json.exception", 0) == 0 && p != std::string::npos) s = s.substr(p + 2);
    return s;
  }
  Violations& v_;
};

void read_grid(Walker& w, const json& j, GridSpec& g) {
  if (j.is_string()) {
    w.guard("grid", [&] {
      const auto [c, r] = parse_grid_size(j.get<std::string>());
      g.n_cols = c;
      g.n_rows = r;
    });
    return;
  }
  if (!w.object(j, "grid")) return;
  w.keys(j, "grid", {"n_cols", "n_rows", "cell_m", "origin", "expected_points", "size"});
  if (j.contains("size")) read_grid(w, j.at("size"), g);
  w.read(j, "grid", "n_cols", g.n_cols);
  w.read(j, "grid", "n_rows", g.n_rows);
  w.read(j, "grid", "cell_m", g.cell_m);
  w.read(j, "grid", "origin", g.origin);
  if (const auto it = j.find("expected_points"); it != j.end()) {
    if (it->is_null()) {
      g.expected_points.reset();
    } else {
      int n = 0;
      w.read(j, "grid", "expected_points", n);
      g.expected_points = n;
    }
  }
}

void read_scene(Walker& w, const json& j, RunConfig& c) {
  if (!w.object(j, "scene")) return;
  w.keys(j, "scene",
         {"tx", "rx", "room_min", "room_max", "clutter_count", "clutter_reflectivity_min",
          "clutter_reflectivity_max", "target", "seed"});
  auto& l = c.scene;
  w.read(j, "scene", "tx", l.tx);
  w.read(j, "scene", "rx", l.rx);
  w.read(j, "scene", "room_min", l.room_min);
  w.read(j, "scene", "room_max", l.room_max);
  w.read(j, "scene", "clutter_count", l.clutter_count);
  w.read(j, "scene", "clutter_reflectivity_min", l.clutter_reflectivity_min);
  w.read(j, "scene", "clutter_reflectivity_max", l.clutter_reflectivity_max);
  w.read(j, "scene", "seed", c.scene_seed);
  if (const auto it = j.find("target"); it != j.end() && w.object(*it, "scene.target")) {
    w.keys(*it, "scene.target", {"body_radius_m", "reflectivity", "blockage_db"});
    w.read(*it, "scene.target", "body_radius_m", l.target_model.body_radius_m);
    w.read(*it, "scene.target", "reflectivity", l.target_model.reflectivity);
    w.read(*it, "scene.target", "blockage_db", l.target_model.blockage_db);
  }
}

void read_models(Walker& w, const json& j, eval::ModelHyper& h) {
  if (!w.object(j, "models")) return;
  w.keys(j, "models", {"nn", "gbt"});
  if (const auto it = j.find("nn"); it != j.end() && w.object(*it, "models.nn")) {
    w.keys(*it, "models.nn",
           {"epochs", "batch_size", "learning_rate", "patience", "blocks", "channels", "kernel", "pool",
            "dense_units"});
    w.read(*it, "models.nn", "epochs", h.nn.epochs);
    w.read(*it, "models.nn", "batch_size", h.nn.batch_size);
    w.read(*it, "models.nn", "learning_rate", h.nn.learning_rate);
    w.read(*it, "models.nn", "patience", h.nn.patience);
    w.read(*it, "models.nn", "blocks", h.arch.blocks);
    w.read(*it, "models.nn", "channels", h.arch.channels);
    w.read(*it, "models.nn", "kernel", h.arch.kernel);
    w.read(*it, "models.nn", "pool", h.arch.pool);
    w.read(*it, "models.nn", "dense_units", h.arch.dense_units);
  }
  if (const auto it = j.find("gbt"); it != j.end() && w.object(*it, "models.gbt")) {
    const std::string p = "models.gbt";
    w.keys(*it, p,
           {"n_estimators", "max_depth", "learning_rate", "lambda", "gamma", "n_quantile_candidates",
            "subsample", "grid_search", "grid"});
    w.read(*it, p, "n_estimators", h.gbt.n_estimators);
    w.read(*it, p, "max_depth", h.gbt.max_depth);
    w.read(*it, p, "learning_rate", h.gbt.learning_rate);
    w.read(*it, p, "lambda", h.gbt.lambda);
    w.read(*it, p, "gamma", h.gbt.gamma);
    w.read(*it, p, "n_quantile_candidates", h.gbt.n_quantile_candidates);
    w.read(*it, p, "subsample", h.gbt.subsample);
    w.read(*it, p, "grid_search", h.grid_search);
    if (const auto g = it->find("grid"); g != it->end() && w.object(*g, p + ".grid")) {
      w.keys(*g, p + ".grid", {"n_estimators", "max_depth", "learning_rate"});
      w.read(*g, p + ".grid", "n_estimators", h.grid.n_estimators);
      w.read(*g, p + ".grid", "max_depth", h.grid.max_depth);
      w.read(*g, p + ".grid", "learning_rate", h.grid.learning_rate);
    }
  }
}

void read_experiments(Walker& w, const json& j, RunConfig& c) {
  if (!j.is_array()) {
    w.guard("experiments", [] { throw std::invalid_argument("expected a list"); });
    return;
  }
  c.experiments.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = "experiments[" + std::to_string(i) + "]";
    const auto& e = j[i];
    if (!w.object(e, p)) continue;
    w.keys(e, p, {"task", "models", "combos"});
    eval::Experiment x;
    w.guard(p + ".task", [&] { x.task = nn::parse_task(e.at("task").get<std::string>()); });
    w.guard(p + ".models", [&] {
      for (const auto& m : e.at("models")) {
        const auto k = eval::parse_model_kind(m.get<std::string>());
        if (std::find(x.models.begin(), x.models.end(), k) == x.models.end()) x.models.push_back(k);
      }
    });
    w.guard(p + ".combos", [&] {
      const auto& cs = e.at("combos");
      if (cs.is_string() && cs.get<std::string>() == "all") {
        x.combos = eval::all_combos(c.receiver_ids);
        return;
      }
      for (const auto& s : cs) {
        auto combo = eval::LinkCombo::parse(s.get<std::string>());
        if (std::find(x.combos.begin(), x.combos.end(), combo) == x.combos.end()) x.combos.push_back(combo);
      }
    });
    c.experiments.push_back(std::move(x));
  }
}

}  // namespace

RunConfig::RunConfig() {
  grid.expected_points = 462;
  sweep.noise_std = 0.07;
  experiments = default_experiments();
}

std::pair<int, int> parse_grid_size(std::string_view text) {
  const auto x = text.find_first_of("xX");
  int c = 0, r = 0;
  const auto ok = [](std::string_view s, int& v) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
  };
  if (x == std::string_view::npos || !ok(text.substr(0, x), c) || !ok(text.substr(x + 1), r))
    throw std::invalid_argument("grid size must look like 21x22, got '" + std::string(text) + "'");
  return {c, r};
}

Violations RunConfig::check() const {
  Violations v;
  v.merge(sweep.check(), "sweep.");
  v.merge(grid.check(), "grid.");
  v.require(!out_dir.empty(), "out_dir must not be empty");
  v.require(!receiver_ids.empty(), "receiver_ids must not be empty");
  v.require(receiver_ids.size() == scene.rx.size(),
            "receiver_ids has " + std::to_string(receiver_ids.size()) + " entries but scene.rx has " +
                std::to_string(scene.rx.size()));
  v.require(std::set<int>(receiver_ids.begin(), receiver_ids.end()).size() == receiver_ids.size(),
            "receiver_ids must be distinct");
  v.require(augmentation >= 1, "augmentation must be >= 1");
  v.require(features.k_taps >= 1 && features.k_taps <= sweep.num_points,
            "features.k_taps must lie in [1, sweep.num_points]");
  v.require(scene.clutter_count >= 0, "scene.clutter_count must be >= 0");
  v.require(scene.clutter_reflectivity_min >= 0 && scene.clutter_reflectivity_min <= scene.clutter_reflectivity_max,
            "scene clutter reflectivity range must satisfy 0 <= min <= max");
  v.require(scene.room_min.x < scene.room_max.x && scene.room_min.y < scene.room_max.y,
            "scene.room_min must lie below and left of scene.room_max");
  v.require(scene.target_model.body_radius_m > 0, "scene.target.body_radius_m must be > 0");
  v.require(scene.target_model.reflectivity >= 0, "scene.target.reflectivity must be >= 0");
  v.require(split.val_fraction >= 0 && split.val_fraction < 1, "split.val_fraction must lie in [0, 1)");
  if (split.test_bins.empty()) {
    v.require(split.test_count >= 1 && split.test_count < grid.size(),
              "split.test_count must lie in [1, grid size)");
  } else {
    for (int b : split.test_bins) v.require(b >= 0 && b < grid.size(), "split.test_bins entries must be grid indices");
  }
  v.merge(hyper.check(), "models.");
  v.require(!experiments.empty(), "experiments must not be empty");
  for (std::size_t i = 0; i < experiments.size(); ++i) {
    const std::string p = "experiments[" + std::to_string(i) + "]";
    v.require(!experiments[i].models.empty(), p + ".models must not be empty");
    v.require(!experiments[i].combos.empty(), p + ".combos must not be empty");
    for (const auto& c : experiments[i].combos) {
      v.require(c.receiver_ids.size() <= 3, p + ": combo " + c.name() + " has more than 3 links");
      for (int id : c.receiver_ids)
        v.require(std::find(receiver_ids.begin(), receiver_ids.end(), id) != receiver_ids.end(),
                  p + ": combo " + c.name() + " uses unknown receiver " + std::to_string(id));
    }
  }
  return v;
}

CampaignSpec RunConfig::campaign() const {
  CampaignSpec s;
  s.grid = grid;
  s.scene_template = make_lab_scene(scene, scene_seed);
  s.sweep = sweep;
  s.features = features;
  s.receiver_ids = receiver_ids;
  s.augmentation = augmentation;
  s.seed = derive_seed(seed, {kCampaignTag});
  return s;
}

SplitSpec RunConfig::split_spec() const {
  const auto split_seed = derive_seed(seed, {kSplitTag});
  if (split.test_bins.empty()) return make_random_split(grid.size(), split.test_count, split.val_fraction, split_seed);
  SplitSpec s;
  s.test_bins = split.test_bins;
  std::sort(s.test_bins.begin(), s.test_bins.end());
  for (int b = 0; b < grid.size(); ++b)
    if (!std::binary_search(s.test_bins.begin(), s.test_bins.end(), b)) s.train_bins.push_back(b);
  s.val_fraction = split.val_fraction;
  s.seed = split_seed;
  return s;
}

eval::SuiteSpec RunConfig::suite() const {
  eval::SuiteSpec s;
  s.experiments = experiments;
  s.split = split_spec();
  s.hyper = hyper;
  s.seed = derive_seed(seed, {kSuiteTag});
  s.config_snapshot = snapshot();
  return s;
}

std::string RunConfig::snapshot() const { return config_to_json(*this).dump(); }

json config_to_json(const RunConfig& c) {
  json experiments = json::array();
  for (const auto& e : c.experiments) {
    json models = json::array(), combos = json::array();
    for (auto m : e.models) models.push_back(std::string(eval::to_string(m)));
    for (const auto& k : e.combos) combos.push_back(k.name());
    experiments.push_back({{"task", std::string(nn::to_string(e.task))}, {"models", models}, {"combos", combos}});
  }
  json scene = c.scene;
  scene.erase("target");
  scene["target"] = {{"body_radius_m", c.scene.target_model.body_radius_m},
                     {"reflectivity", c.scene.target_model.reflectivity},
                     {"blockage_db", c.scene.target_model.blockage_db}};
  scene["seed"] = c.scene_seed;
  json split = {{"test_count", c.split.test_count}, {"val_fraction", c.split.val_fraction}};
  if (!c.split.test_bins.empty()) split["test_bins"] = c.split.test_bins;
  return {{"seed", c.seed},
          {"out_dir", c.out_dir},
          {"sweep", c.sweep},
          {"grid", c.grid},
          {"scene", scene},
          {"features", c.features},
          {"receiver_ids", c.receiver_ids},
          {"augmentation", c.augmentation},
          {"split", split},
          {"models", hyper_json(c.hyper)},
          {"experiments", experiments}};
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  Violations v;
  Walker w(v);
  if (!w.object(j, "config")) {
    v.throw_if_any();
  }
  w.keys(j, "",
         {"seed", "out_dir", "sweep", "grid", "scene", "features", "receiver_ids", "augmentation", "split",
          "models", "experiments"});
  w.read(j, "", "seed", c.seed);
  w.read(j, "", "out_dir", c.out_dir);
  if (const auto it = j.find("sweep"); it != j.end() && w.object(*it, "sweep")) {
    w.keys(*it, "sweep", {"center_frequency_hz", "bandwidth_hz", "num_points", "noise_std", "calibration_delay_s"});
    w.read(*it, "sweep", "center_frequency_hz", c.sweep.center_frequency_hz);
    w.read(*it, "sweep", "bandwidth_hz", c.sweep.bandwidth_hz);
    w.read(*it, "sweep", "num_points", c.sweep.num_points);
    w.read(*it, "sweep", "noise_std", c.sweep.noise_std);
    w.read(*it, "sweep", "calibration_delay_s", c.sweep.calibration_delay_s);
  }
  if (const auto it = j.find("grid"); it != j.end()) read_grid(w, *it, c.grid);
  if (const auto it = j.find("scene"); it != j.end()) read_scene(w, *it, c);
  if (const auto it = j.find("features"); it != j.end() && w.object(*it, "features")) {
    w.keys(*it, "features", {"k_taps", "mode", "normalize"});
    w.read(*it, "features", "k_taps", c.features.k_taps);
    w.guard("features.mode", [&] {
      if (it->contains("mode")) c.features.mode = parse_feature_mode(it->at("mode").get<std::string>());
    });
    w.guard("features.normalize", [&] {
      if (it->contains("normalize")) c.features.normalize = parse_normalization(it->at("normalize").get<std::string>());
    });
  }
  w.read(j, "", "receiver_ids", c.receiver_ids);
  w.read(j, "", "augmentation", c.augmentation);
  if (const auto it = j.find("split"); it != j.end() && w.object(*it, "split")) {
    w.keys(*it, "split", {"test_count", "val_fraction", "test_bins"});
    w.read(*it, "split", "test_count", c.split.test_count);
    w.read(*it, "split", "val_fraction", c.split.val_fraction);
    w.read(*it, "split", "test_bins", c.split.test_bins);
  }
  if (const auto it = j.find("models"); it != j.end()) read_models(w, *it, c.hyper);
  if (const auto it = j.find("experiments"); it != j.end()) read_experiments(w, *it, c);
  v.merge(c.check());
  v.throw_if_any();
  return c;
}

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);  // comments allowed
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
  }
  return config_from_json(j);
}

RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError({"config file not found: " + path.string()});
  return parse_config(io::read_text(path));
}

}  // namespace cirsense
