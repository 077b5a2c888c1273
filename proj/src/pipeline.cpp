#include "cirsense/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <regex>

#include "cirsense/binary_io.hpp"

namespace cirsense {

namespace {

void say(const Log& log, const std::string& s) {
  if (log) log(s);
}

void check_dataset(const RunConfig& cfg, const Dataset& data) {
  Violations v;
  v.require(data.info.grid.size() == cfg.grid.size(),
            "dataset grid has " + std::to_string(data.info.grid.size()) + " bins, config has " +
                std::to_string(cfg.grid.size()));
  v.require(data.info.receiver_ids == cfg.receiver_ids, "dataset receivers differ from config receiver_ids");
  v.throw_if_any();
}

}  // namespace

void stamp_snapshot(const RunConfig& cfg, const std::filesystem::path& dir) {
  io::write_text(dir / "config.json", config_to_json(cfg).dump(2) + "\n");
}

Dataset cmd_simulate(const RunConfig& cfg, const std::filesystem::path& path, const Log& log) {
  cfg.check().throw_if_any();
  const auto t0 = std::chrono::steady_clock::now();
  Dataset d = make_dataset(cfg.campaign(), cfg.snapshot());
  save_dataset(d, path);
  stamp_snapshot(cfg, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char buf[160];
  std::snprintf(buf, sizeof buf, "simulated %zu samples in %.1f s -> %s", d.samples.size(), s, path.string().c_str());
  say(log, buf);
  return d;
}

Dataset cmd_import(const RunConfig& cfg, const std::filesystem::path& dir,
                   const std::filesystem::path& path, const Log& log) {
  cfg.check().throw_if_any();
  if (!std::filesystem::is_directory(dir)) throw Error("trace directory not found: " + dir.string());
  const std::regex name(R"((\d+)-(target|null))");
  std::vector<std::filesystem::path> entries;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_directory()) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());

  Dataset d;
  d.info.grid = cfg.grid;
  d.info.sweep = cfg.sweep;
  d.info.features = cfg.features;
  d.info.receiver_ids = cfg.receiver_ids;
  d.info.seed = cfg.seed;
  d.info.config_snapshot = cfg.snapshot();
  for (const auto& e : entries) {
    std::smatch m;
    const std::string leaf = e.filename().string();
    if (!std::regex_match(leaf, m, name)) throw FormatError("unexpected trace directory name: " + leaf);
    const int bin = std::stoi(m[1].str());
    if (bin < 0 || bin >= cfg.grid.size()) throw FormatError("trace bin out of range: " + leaf);
    const auto sweeps = import_sweep_traces(e, cfg.sweep);
    if (sweeps.size() != cfg.receiver_ids.size())
      throw FormatError(leaf + ": expected " + std::to_string(cfg.receiver_ids.size()) + " trace files, found " +
                        std::to_string(sweeps.size()));
    std::vector<Cir> cirs;
    for (std::size_t k = 0; k < sweeps.size(); ++k) {
      cirs.push_back(cir_from_sweep(sweeps[k]));
      cirs.back().link_id = cfg.receiver_ids[k];
    }
    SensingSample s;
    s.features = features_from_cirs(cirs, cfg.features);
    s.bin = bin;
    s.link_ids = cfg.receiver_ids;
    if (m[2] == "target") {
      s.hypothesis = Hypothesis::kTarget;
      s.grid_index = bin;
      s.position_m = grid_to_position(cfg.grid, bin);
    }
    d.samples.push_back(std::move(s));
  }
  if (d.samples.empty()) throw FormatError("no measurements found in " + dir.string());
  d.info.layout = d.samples.front().features.layout;
  save_dataset(d, path);
  stamp_snapshot(cfg, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
  say(log, "imported " + std::to_string(d.samples.size()) + " measurements -> " + path.string());
  return d;
}

void cmd_train(const RunConfig& cfg, const Dataset& data, eval::ModelKind kind, nn::Task task,
               const eval::LinkCombo& combo, const std::filesystem::path& checkpoint, const Log& log) {
  cfg.check().throw_if_any();
  check_dataset(cfg, data);
  const auto split = split_campaign(data.samples, cfg.split_spec(), data.info.grid.size());
  const auto suite = cfg.suite();
  const auto train = eval::restrict_links(split.train, combo.receiver_ids);
  const auto val = eval::restrict_links(split.val, combo.receiver_ids);
  const ModelMeta meta{data.info.features, combo.receiver_ids, cfg.snapshot()};
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = eval::train_model(kind, task, train, val, cfg.hyper, meta,
                                       eval::cell_seed(suite.seed, task, kind, combo));
  model->save(checkpoint);
  stamp_snapshot(cfg, checkpoint.has_parent_path() ? checkpoint.parent_path() : std::filesystem::path("."));
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char buf[200];
  std::snprintf(buf, sizeof buf, "trained %s/%s/%s in %.1f s -> %s", std::string(eval::to_string(kind)).c_str(),
                std::string(nn::to_string(task)).c_str(), combo.name().c_str(), s, checkpoint.string().c_str());
  say(log, buf);
}

std::vector<eval::EvalReport> cmd_eval_checkpoints(const RunConfig& cfg, const Dataset& data,
                                                   const std::vector<std::filesystem::path>& checkpoints) {
  cfg.check().throw_if_any();
  check_dataset(cfg, data);
  const auto split = split_campaign(data.samples, cfg.split_spec(), data.info.grid.size());
  std::vector<eval::EvalReport> out;
  for (const auto& p : checkpoints) {
    const auto model = eval::load_model(p);
    if (model->meta().features != data.info.features)
      throw ShapeError(p.string() + ": checkpoint feature encoding differs from the dataset");
    auto r = eval::evaluate_model(*model, split.test, data.info.receiver_ids);
    r.config_snapshot = model->meta().config_snapshot;
    r.grid_table = model->grid_table();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<eval::EvalReport> cmd_eval(const RunConfig& cfg, const Dataset& data,
                                       const std::optional<std::filesystem::path>& checkpoint_dir,
                                       const Log& log) {
  cfg.check().throw_if_any();
  check_dataset(cfg, data);
  auto suite = cfg.suite();
  suite.checkpoint_dir = checkpoint_dir;
  const auto t0 = std::chrono::steady_clock::now();
  if (checkpoint_dir) stamp_snapshot(cfg, *checkpoint_dir);
  auto reports = eval::run_experiment_suite(data, suite);
  eval::check_split_hygiene(reports);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& r : reports) {
    char buf[240];
    if (r.error) {
      std::snprintf(buf, sizeof buf, "%s %s %s: failed: %s", std::string(nn::to_string(r.task)).c_str(),
                    r.model_id.c_str(), r.combo.name().c_str(), r.error->c_str());
    } else if (r.accuracy) {
      std::snprintf(buf, sizeof buf, "%s %s %s: accuracy %.4f", std::string(nn::to_string(r.task)).c_str(),
                    r.model_id.c_str(), r.combo.name().c_str(), *r.accuracy);
    } else {
      std::snprintf(buf, sizeof buf, "%s %s %s: mean error %.4f m", std::string(nn::to_string(r.task)).c_str(),
                    r.model_id.c_str(), r.combo.name().c_str(), r.mean_error_m.value_or(0.0));
    }
    say(log, buf);
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "suite finished in %.1f s", s);
  say(log, buf);
  return reports;
}

void write_reports(const std::vector<eval::EvalReport>& reports, const RunConfig& cfg,
                   const std::filesystem::path& dir) {
  eval::emit_report(reports, eval::ReportFormat::kCsv, dir / "reports.csv");
  eval::emit_report(reports, eval::ReportFormat::kJson, dir / "reports.json");
  eval::emit_report(reports, eval::ReportFormat::kSvg, dir / "error_cdf.svg");
  stamp_snapshot(cfg, dir);
}

std::vector<eval::EvalReport> cmd_reproduce(const RunConfig& cfg, const Log& log) {
  const std::filesystem::path out = cfg.out_dir;
  const Dataset data = cmd_simulate(cfg, out / "dataset.bin", log);
  auto reports = cmd_eval(cfg, data, out / "checkpoints", log);
  write_reports(reports, cfg, out);
  say(log, "reports written to " + out.string());
  return reports;
}

}  // namespace cirsense
