// cirsense command-line entry point.
//
// Exit codes: 0 ok, 1 usage, 2 configuration, 3 runtime.
// Failures print one JSON line to stderr: {"error": kind, "message": ..., ...}.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cirsense/pipeline.hpp"

namespace {

using namespace cirsense;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3 };

int fail(const std::string& kind, const std::string& message, int code,
         const std::vector<std::string>& violations = {}) {
  nlohmann::json j = {{"error", kind}, {"message", message}, {"exit_code", code}};
  if (!violations.empty()) j["violations"] = violations;
  std::cerr << j.dump() << std::endl;
  return code;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string models;
  std::string combos;
  std::string grid;
  bool quiet = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON run configuration");
  app->add_option("--seed", c.seed, "global seed (overrides config)");
  app->add_option("--out", c.out, "output path or directory (overrides config and CIRSENSE_OUT_DIR)");
  app->add_option("--models", c.models, "comma-separated: typea,typeb,typec,baseline");
  app->add_option("--combos,--links", c.combos, "comma-separated link combos, e.g. N2,N234 (or 'all')");
  app->add_option("--grid", c.grid, "grid size, e.g. 21x22");
  app->add_flag("-q,--quiet", c.quiet, "no progress output");
}

/// Config file, then environment, then flags.
RunConfig resolve(const Common& c, bool out_is_dir) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (const char* env = std::getenv("CIRSENSE_OUT_DIR"); env && *env) cfg.out_dir = env;
  if (c.seed) cfg.seed = *c.seed;
  if (out_is_dir && !c.out.empty()) cfg.out_dir = c.out;
  if (!c.grid.empty()) {
    try {
      const auto [cols, rows] = parse_grid_size(c.grid);
      cfg.grid.n_cols = cols;
      cfg.grid.n_rows = rows;
    } catch (const std::invalid_argument& e) {
      throw ConfigError({std::string("--grid: ") + e.what()});
    }
  }
  try {
    if (!c.models.empty()) {
      const auto models = eval::parse_model_list(c.models);
      for (auto& e : cfg.experiments) e.models = models;
    }
    if (!c.combos.empty()) {
      const auto combos = c.combos == "all" ? eval::all_combos(cfg.receiver_ids) : eval::parse_combo_list(c.combos);
      for (auto& e : cfg.experiments) e.combos = combos;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError({e.what()});
  }
  cfg.check().throw_if_any();
  return cfg;
}

Log logger(const Common& c) {
  if (c.quiet) return {};
  return [](const std::string& s) { std::cerr << "[cirsense] " << s << std::endl; };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multistatic CIR sensing: simulate, train, evaluate."};
  app.require_subcommand(1);

  Common sim_opts, imp_opts, train_opts, eval_opts, repro_opts;

  auto* sim = app.add_subcommand("simulate", "generate the synthetic campaign dataset");
  add_common(sim, sim_opts);

  auto* imp = app.add_subcommand("import", "build a dataset from measured sweep traces");
  add_common(imp, imp_opts);
  std::string traces;
  imp->add_option("--traces", traces, "directory of <bin>-target / <bin>-null measurement folders")->required();

  auto* train = app.add_subcommand("train", "train one model and write its checkpoint");
  add_common(train, train_opts);
  std::string train_data, train_model = "typea", train_task = "position";
  train->add_option("--data", train_data, "dataset file")->required();
  train->add_option("--model", train_model, "typea, typeb, typec or baseline");
  train->add_option("--task", train_task, "detect or position");

  auto* ev = app.add_subcommand("eval", "train and score the suite, or score saved checkpoints");
  add_common(ev, eval_opts);
  std::string eval_data, ckpt_dir;
  std::vector<std::string> ckpt_files;
  ev->add_option("--data", eval_data, "dataset file")->required();
  ev->add_option("--checkpoints", ckpt_dir, "directory for checkpoints written by the suite");
  ev->add_option("--score", ckpt_files, "score these saved checkpoints instead of training");

  auto* repro = app.add_subcommand("reproduce", "simulate, run the full suite and write reports");
  add_common(repro, repro_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kUsage);
  }

  try {
    if (sim->parsed()) {
      const auto cfg = resolve(sim_opts, false);
      const fs::path out = sim_opts.out.empty() ? fs::path(cfg.out_dir) / "dataset.bin" : fs::path(sim_opts.out);
      cmd_simulate(cfg, out, logger(sim_opts));
    } else if (imp->parsed()) {
      const auto cfg = resolve(imp_opts, false);
      const fs::path out = imp_opts.out.empty() ? fs::path(cfg.out_dir) / "dataset.bin" : fs::path(imp_opts.out);
      cmd_import(cfg, traces, out, logger(imp_opts));
    } else if (train->parsed()) {
      const auto cfg = resolve(train_opts, false);
      eval::ModelKind kind;
      nn::Task task;
      eval::LinkCombo combo{cfg.receiver_ids};
      try {
        kind = eval::parse_model_kind(train_model);
        task = nn::parse_task(train_task);
        if (!train_opts.combos.empty()) {
          const auto list = eval::parse_combo_list(train_opts.combos);
          if (list.size() != 1) return fail("usage", "train takes exactly one link combo", kUsage);
          combo = list.front();
        }
      } catch (const std::invalid_argument& e) {
        return fail("usage", e.what(), kUsage);
      }
      const fs::path out = train_opts.out.empty()
                               ? fs::path(cfg.out_dir) / (std::string(nn::to_string(task)) + "-" +
                                                          std::string(eval::to_string(kind)) + "-" + combo.name() + ".ckpt")
                               : fs::path(train_opts.out);
      cmd_train(cfg, load_dataset(train_data), kind, task, combo, out, logger(train_opts));
    } else if (ev->parsed()) {
      const auto cfg = resolve(eval_opts, true);
      const auto data = load_dataset(eval_data);
      std::vector<eval::EvalReport> reports;
      if (!ckpt_files.empty()) {
        std::vector<fs::path> paths(ckpt_files.begin(), ckpt_files.end());
        reports = cmd_eval_checkpoints(cfg, data, paths);
      } else {
        std::optional<fs::path> dir;
        if (!ckpt_dir.empty()) dir = ckpt_dir;
        reports = cmd_eval(cfg, data, dir, logger(eval_opts));
      }
      write_reports(reports, cfg, cfg.out_dir);
    } else if (repro->parsed()) {
      cmd_reproduce(resolve(repro_opts, true), logger(repro_opts));
    }
  } catch (const ConfigError& e) {
    return fail("config", e.what(), kConfig, e.violations());
  } catch (const FormatError& e) {
    return fail("format", e.what(), kRuntime);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), kRuntime);
  }
  return kOk;
}
