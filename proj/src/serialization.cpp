#include "cirsense/serialization.hpp"

namespace cirsense {

namespace {
template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) it->get_to(out);
}
}  // namespace

void to_json(json& j, const Point& p) { j = json::array({p.x, p.y}); }

void from_json(const json& j, Point& p) {
  if (j.is_array()) {
    if (j.size() != 2) throw json::type_error::create(302, "point must have 2 coordinates", &j);
    p = {j.at(0).get<double>(), j.at(1).get<double>()};
  } else {
    p = {j.at("x").get<double>(), j.at("y").get<double>()};
  }
}

void to_json(json& j, const SweepConfig& c) {
  j = {{"center_frequency_hz", c.center_frequency_hz},
       {"bandwidth_hz", c.bandwidth_hz},
       {"num_points", c.num_points},
       {"noise_std", c.noise_std},
       {"calibration_delay_s", c.calibration_delay_s}};
}

void from_json(const json& j, SweepConfig& c) {
  read_opt(j, "center_frequency_hz", c.center_frequency_hz);
  read_opt(j, "bandwidth_hz", c.bandwidth_hz);
  read_opt(j, "num_points", c.num_points);
  read_opt(j, "noise_std", c.noise_std);
  read_opt(j, "calibration_delay_s", c.calibration_delay_s);
}

void to_json(json& j, const ClutterPoint& c) {
  j = {{"position", c.position}, {"reflectivity", c.reflectivity}};
}

void from_json(const json& j, ClutterPoint& c) {
  read_opt(j, "position", c.position);
  read_opt(j, "reflectivity", c.reflectivity);
}

void to_json(json& j, const Target& t) {
  j = {{"position", t.position},
       {"body_radius_m", t.body_radius_m},
       {"reflectivity", t.reflectivity},
       {"blockage_db", t.blockage_db}};
}

void from_json(const json& j, Target& t) {
  read_opt(j, "position", t.position);
  read_opt(j, "body_radius_m", t.body_radius_m);
  read_opt(j, "reflectivity", t.reflectivity);
  read_opt(j, "blockage_db", t.blockage_db);
}

void to_json(json& j, const Scene& s) {
  j = {{"tx_position", s.tx_position},
       {"rx_positions", s.rx_positions},
       {"clutter_points", s.clutter_points},
       {"target", s.target ? json(*s.target) : json(nullptr)},
       {"seed", s.seed}};
}

void from_json(const json& j, Scene& s) {
  read_opt(j, "tx_position", s.tx_position);
  read_opt(j, "rx_positions", s.rx_positions);
  read_opt(j, "clutter_points", s.clutter_points);
  if (auto it = j.find("target"); it != j.end()) {
    if (it->is_null())
      s.target.reset();
    else
      s.target = it->get<Target>();
  }
  read_opt(j, "seed", s.seed);
}

void to_json(json& j, const LabLayout& l) {
  j = {{"tx", l.tx},
       {"rx", l.rx},
       {"room_min", l.room_min},
       {"room_max", l.room_max},
       {"clutter_count", l.clutter_count},
       {"clutter_reflectivity_min", l.clutter_reflectivity_min},
       {"clutter_reflectivity_max", l.clutter_reflectivity_max},
       {"target", l.target_model}};
}

void from_json(const json& j, LabLayout& l) {
  read_opt(j, "tx", l.tx);
  read_opt(j, "rx", l.rx);
  read_opt(j, "room_min", l.room_min);
  read_opt(j, "room_max", l.room_max);
  read_opt(j, "clutter_count", l.clutter_count);
  read_opt(j, "clutter_reflectivity_min", l.clutter_reflectivity_min);
  read_opt(j, "clutter_reflectivity_max", l.clutter_reflectivity_max);
  read_opt(j, "target", l.target_model);
}

void to_json(json& j, const GridSpec& g) {
  j = {{"n_cols", g.n_cols}, {"n_rows", g.n_rows}, {"cell_m", g.cell_m}, {"origin", g.origin}};
  j["expected_points"] = g.expected_points ? json(*g.expected_points) : json(nullptr);
}

void from_json(const json& j, GridSpec& g) {
  read_opt(j, "n_cols", g.n_cols);
  read_opt(j, "n_rows", g.n_rows);
  read_opt(j, "cell_m", g.cell_m);
  read_opt(j, "origin", g.origin);
  if (auto it = j.find("expected_points"); it != j.end())
    g.expected_points = it->is_null() ? std::nullopt : std::optional<int>(it->get<int>());
}

void to_json(json& j, const FeatureOptions& f) {
  j = {{"k_taps", f.k_taps},
       {"mode", std::string(to_string(f.mode))},
       {"normalize", std::string(to_string(f.normalize))}};
}

void from_json(const json& j, FeatureOptions& f) {
  read_opt(j, "k_taps", f.k_taps);
  if (j.contains("mode")) f.mode = parse_feature_mode(j.at("mode").get<std::string>());
  if (j.contains("normalize"))
    f.normalize = parse_normalization(j.at("normalize").get<std::string>());
}

void to_json(json& j, const FeatureLayout& f) {
  j = {{"num_links", f.num_links}, {"channels_per_link", f.channels_per_link}, {"length", f.length}};
}

void from_json(const json& j, FeatureLayout& f) {
  read_opt(j, "num_links", f.num_links);
  read_opt(j, "channels_per_link", f.channels_per_link);
  read_opt(j, "length", f.length);
}

void to_json(json& j, const SplitSpec& s) {
  j = {{"train_bins", s.train_bins},
       {"test_bins", s.test_bins},
       {"val_fraction", s.val_fraction},
       {"seed", s.seed}};
}

void from_json(const json& j, SplitSpec& s) {
  read_opt(j, "train_bins", s.train_bins);
  read_opt(j, "test_bins", s.test_bins);
  read_opt(j, "val_fraction", s.val_fraction);
  read_opt(j, "seed", s.seed);
}

void to_json(json& j, const DatasetInfo& d) {
  j = {{"grid", d.grid},
       {"sweep", d.sweep},
       {"features", d.features},
       {"layout", d.layout},
       {"receiver_ids", d.receiver_ids},
       {"seed", d.seed},
       {"augmentation", d.augmentation},
       {"config_snapshot", d.config_snapshot}};
}

void from_json(const json& j, DatasetInfo& d) {
  read_opt(j, "grid", d.grid);
  read_opt(j, "sweep", d.sweep);
  read_opt(j, "features", d.features);
  read_opt(j, "layout", d.layout);
  read_opt(j, "receiver_ids", d.receiver_ids);
  read_opt(j, "seed", d.seed);
  read_opt(j, "augmentation", d.augmentation);
  read_opt(j, "config_snapshot", d.config_snapshot);
}

}  // namespace cirsense
