#include "cirsense/eval/suite.hpp"

#include <algorithm>
#include <set>

#include "cirsense/parallel.hpp"
#include "cirsense/seed.hpp"

namespace cirsense::eval {

std::uint64_t cell_seed(std::uint64_t seed, nn::Task task, ModelKind kind, const LinkCombo& combo) {
  std::uint64_t mask = 0;
  for (int id : combo.receiver_ids) mask |= std::uint64_t{1} << (id & 63);
  return derive_seed(seed, {static_cast<std::uint64_t>(task), static_cast<std::uint64_t>(kind), mask});
}

namespace {

std::vector<int> bins_of(std::span<const SensingSample> samples) {
  std::set<int> b;
  for (const auto& s : samples) b.insert(s.bin);
  return {b.begin(), b.end()};
}

std::vector<SensingSample> for_task(std::span<const SensingSample> samples, nn::Task task) {
  std::vector<SensingSample> out;
  for (const auto& s : samples)
    if (task == nn::Task::kDetect || s.hypothesis == Hypothesis::kTarget) out.push_back(s);
  return out;
}

}  // namespace

EvalReport evaluate_model(const TrainedModel& model, std::span<const SensingSample> samples,
                          std::span<const int> available_ids) {
  (void)available_ids;  // every sample carries its own link ids
  EvalReport r;
  r.task = model.task();
  r.model_id = std::string(to_string(model.kind()));
  r.combo = LinkCombo::from_ids(model.meta().receiver_ids);
  const auto picked = restrict_links(for_task(samples, r.task), model.meta().receiver_ids);
  r.test_count = static_cast<int>(picked.size());
  r.test_bins = bins_of(picked);
  if (r.task == nn::Task::kDetect) {
    std::vector<Hypothesis> truth;
    for (const auto& s : picked) truth.push_back(s.hypothesis);
    r.accuracy = detection_accuracy(model.predict_detect(picked), truth);
  } else {
    std::vector<Point> truth;
    for (const auto& s : picked) truth.push_back(*s.position_m);
    const auto stats = position_error_stats(model.predict_position(picked), truth);
    r.mean_error_m = stats.mean_error_m;
    r.error_cdf = stats.cdf;
  }
  return r;
}

std::vector<EvalReport> run_experiment_suite(const Dataset& dataset, const SuiteSpec& spec) {
  spec.hyper.check().throw_if_any();
  const CampaignSplit split = split_campaign(dataset.samples, spec.split, dataset.info.grid.size());

  struct Cell {
    nn::Task task;
    ModelKind kind;
    LinkCombo combo;
  };
  std::vector<Cell> cells;
  for (const auto& e : spec.experiments)
    for (auto k : e.models)
      for (const auto& c : e.combos) cells.push_back({e.task, k, c});

  std::vector<EvalReport> reports(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const auto& cell = cells[i];
    const auto seed = cell_seed(spec.seed, cell.task, cell.kind, cell.combo);
    EvalReport r;
    try {
      const auto train = restrict_links(split.train, cell.combo.receiver_ids);
      const auto val = restrict_links(split.val, cell.combo.receiver_ids);
      ModelMeta meta{dataset.info.features, cell.combo.receiver_ids, spec.config_snapshot};
      const auto model = train_model(cell.kind, cell.task, train, val, spec.hyper, meta, seed);
      r = evaluate_model(*model, split.test, dataset.info.receiver_ids);
      auto fit = bins_of(for_task(train, cell.task));
      const auto vb = bins_of(for_task(val, cell.task));
      fit.insert(fit.end(), vb.begin(), vb.end());
      std::sort(fit.begin(), fit.end());
      r.fit_bins = std::move(fit);
      r.grid_table = model->grid_table();
      if (spec.checkpoint_dir)
        model->save(*spec.checkpoint_dir / (std::string(nn::to_string(cell.task)) + "-" +
                                            std::string(to_string(cell.kind)) + "-" + cell.combo.name() + ".ckpt"));
    } catch (const std::exception& e) {
      r = EvalReport{};
      r.error = e.what();
    }
    r.task = cell.task;
    r.model_id = std::string(to_string(cell.kind));
    r.combo = cell.combo;
    r.seed = seed;
    r.config_snapshot = spec.config_snapshot;
    reports[i] = std::move(r);
  });
  return reports;
}

void check_split_hygiene(const std::vector<EvalReport>& reports) {
  for (const auto& r : reports) {
    std::vector<int> common;
    std::set_intersection(r.fit_bins.begin(), r.fit_bins.end(), r.test_bins.begin(), r.test_bins.end(),
                          std::back_inserter(common));
    if (!common.empty())
      throw Error("split leak in " + std::string(nn::to_string(r.task)) + "/" + r.model_id + "/" +
                  r.combo.name() + ": bin " + std::to_string(common.front()) + " used for fitting and testing");
  }
}

}  // namespace cirsense::eval
