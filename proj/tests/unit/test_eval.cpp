#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "cirsense/dataset.hpp"
#include "cirsense/eval/baseline.hpp"
#include "cirsense/eval/combo.hpp"
#include "cirsense/eval/metrics.hpp"
#include "cirsense/eval/model.hpp"
#include "cirsense/eval/report.hpp"
#include "cirsense/eval/suite.hpp"

using namespace cirsense;
using namespace cirsense::eval;
namespace fs = std::filesystem;

namespace {

SensingSample make_sample(std::vector<double> values, int grid_index, Point p, int links = 1) {
  SensingSample s;
  s.features.layout = {links, 1, static_cast<int>(values.size()) / links};
  s.features.values = std::move(values);
  s.hypothesis = Hypothesis::kTarget;
  s.bin = grid_index;
  s.grid_index = grid_index;
  s.position_m = p;
  for (int l = 0; l < links; ++l) s.link_ids.push_back(2 + l);
  return s;
}

CampaignSpec small_campaign() {
  CampaignSpec c;
  c.grid.n_cols = 5;
  c.grid.n_rows = 4;
  c.scene_template = make_lab_scene(LabLayout{}, 5);
  c.sweep.num_points = 64;
  c.sweep.noise_std = 0.05;
  c.features.k_taps = 16;
  c.seed = 4;
  return c;
}

ModelHyper fast_hyper() {
  ModelHyper h;
  h.nn.epochs = 2;
  h.nn.batch_size = 8;
  h.arch.blocks = 1;
  h.arch.channels = 4;
  h.arch.kernel = 3;
  h.arch.dense_units = 8;
  h.gbt.n_estimators = 5;
  h.gbt.max_depth = 2;
  h.grid = gbt::HyperGrid{{2, 4}, {1, 2}, {0.3}};
  return h;
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cirsense-eval-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EvalReport sample_report(int n) {
  EvalReport r;
  r.task = nn::Task::kPosition;
  r.model_id = "typeb";
  r.combo = LinkCombo::parse("N234");
  std::vector<double> errs;
  for (int i = 0; i < n; ++i) errs.push_back(0.1 * i);
  const auto st = error_stats(errs);
  r.mean_error_m = st.mean_error_m;
  r.error_cdf = st.cdf;
  r.test_count = n;
  r.config_snapshot = R"({"seed":7})";
  r.seed = 99;
  r.fit_bins = {1, 2};
  r.test_bins = {3};
  r.grid_table = {{100, 3, 0.05, 0.25}};
  return r;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("link combo names") {
  CHECK(LinkCombo::parse("N24").name() == "N24");
  CHECK(LinkCombo::parse("42").receiver_ids == std::vector<int>{2, 4});
  CHECK(LinkCombo::parse("4,2,2").name() == "N24");
  CHECK_THROWS(LinkCombo::parse(""));
  CHECK_THROWS(LinkCombo::parse("Nx"));
  const std::vector<int> r{2, 3, 4};
  const auto all = all_combos(r);
  REQUIRE(all.size() == 7);
  std::vector<std::string> names;
  for (const auto& c : all) names.push_back(c.name());
  CHECK(names == std::vector<std::string>{"N2", "N3", "N4", "N23", "N24", "N34", "N234"});
  CHECK(parse_combo_list("N2,N234").size() == 2);
  CHECK(link_positions(std::vector<int>{2, 4}, r) == std::vector<int>{0, 2});
  CHECK_THROWS(link_positions(std::vector<int>{5}, r));
}

TEST_CASE("detection accuracy examples") {
  std::vector<double> p(10, 0.9);
  std::vector<Hypothesis> y(10, Hypothesis::kTarget);
  y[3] = Hypothesis::kNull;
  CHECK(detection_accuracy(p, y) == doctest::Approx(0.9));
  std::vector<double> constant(10, 1.0);
  std::vector<Hypothesis> balanced;
  for (int i = 0; i < 10; ++i) balanced.push_back(i % 2 ? Hypothesis::kTarget : Hypothesis::kNull);
  CHECK(detection_accuracy(constant, balanced) == doctest::Approx(0.5));
  CHECK_THROWS(detection_accuracy(std::vector<double>(3, 0.0), balanced));
}

TEST_CASE("error statistics examples") {
  const auto st = error_stats({3, 0, 4, 1, 2});
  CHECK(st.mean_error_m == doctest::Approx(2.0));
  CHECK(cdf_at(st.cdf, 2.0) == doctest::Approx(0.6));
  CHECK(cdf_at(st.cdf, -1.0) == 0.0);
  CHECK(st.cdf.back().second == 1.0);
  for (std::size_t i = 1; i < st.cdf.size(); ++i) {
    CHECK(st.cdf[i].first >= st.cdf[i - 1].first);
    CHECK(st.cdf[i].second >= st.cdf[i - 1].second);
  }
  const std::vector<Point> pts{{1, 1}, {2, 3}};
  const auto perfect = position_error_stats(pts, pts);
  CHECK(perfect.mean_error_m == 0.0);
  CHECK(cdf_at(perfect.cdf, 0.0) == 1.0);
  const std::vector<Point> off{{4, 5}, {2, 3}};
  CHECK(position_error_stats(off, pts).mean_error_m == doctest::Approx(2.5));
}

TEST_CASE("baseline examples") {
  std::vector<SensingSample> train{make_sample({0, 0}, 5, {1, 1}), make_sample({2, 0}, 1, {2, 2}),
                                   make_sample({0, 2}, 0, {3, 3})};
  const auto m = fit_baseline(train, true);
  CHECK(baseline_predict(m, train[0].features) == Point{1, 1});
  // equidistant from grid 1 and grid 0: lower index wins
  const auto q = make_sample({1, 1}, 9, {0, 0});
  CHECK(baseline_predict(m, q.features) == Point{3, 3});
  CHECK(baseline_predict(train, q.features) == Point{3, 3});
  const auto wrong = make_sample({1, 1, 1}, 9, {0, 0});
  CHECK_THROWS_AS(baseline_predict(m, wrong.features), ShapeError);
  CHECK_THROWS(fit_baseline(std::vector<SensingSample>{}, true));
}

TEST_CASE("baseline agrees with a brute-force scan") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0, 1);
  std::vector<SensingSample> train;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> v(12);
    for (auto& x : v) x = g(rng);
    train.push_back(make_sample(v, i, {g(rng), g(rng)}, 3));
  }
  const auto m = fit_baseline(train, true);
  for (int q = 0; q < 40; ++q) {
    std::vector<double> v(12);
    for (auto& x : v) x = g(rng);
    const auto query = make_sample(v, 0, {0, 0}, 3);
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t i = 0; i < train.size(); ++i) {
      double d = 0;
      for (std::size_t k = 0; k < v.size(); ++k) {
        const double e = train[i].features.values[k] - v[k];
        d += e * e;
      }
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    CHECK(nearest_index(m, query.features) == best);
    CHECK(baseline_predict(m, query.features) == *train[best].position_m);
  }
}

TEST_CASE("baseline memorizes its database and round trips") {
  const auto d = make_dataset(small_campaign());
  const auto m = fit_baseline(d.samples, true);
  std::vector<Point> pred, truth;
  for (const auto& s : d.samples) {
    if (s.hypothesis != Hypothesis::kTarget) continue;
    pred.push_back(baseline_predict(m, s.features));
    truth.push_back(*s.position_m);
  }
  CHECK(position_error_stats(pred, truth).mean_error_m == 0.0);
  const auto back = decode_baseline(encode_baseline(m));
  CHECK(back.features == m.features);
  CHECK(back.positions.size() == m.positions.size());
  CHECK(back.grid_indices == m.grid_indices);
  auto bytes = encode_baseline(m);
  bytes[bytes.size() / 2] ^= 1;
  CHECK_THROWS_AS(decode_baseline(bytes), FormatError);
}

TEST_CASE("suite produces one report per cell") {
  const auto d = make_dataset(small_campaign());
  SuiteSpec spec;
  spec.split = make_random_split(d.info.grid.size(), 5, 0.3, 3);
  spec.hyper = fast_hyper();
  spec.seed = 1;
  spec.config_snapshot = "{}";
  spec.experiments = {{nn::Task::kPosition, {ModelKind::kBaseline}, all_combos(d.info.receiver_ids)}};
  const auto reports = run_experiment_suite(d, spec);
  REQUIRE(reports.size() == 7);
  for (const auto& r : reports) {
    CHECK_FALSE(r.error);
    REQUIRE(r.mean_error_m);
    CHECK(r.test_count == 5);
    CHECK(r.error_cdf.size() == 5);
    CHECK(r.error_cdf.back().second == 1.0);
  }
  CHECK_NOTHROW(check_split_hygiene(reports));
  CHECK(reports[0].combo.name() == "N2");
  CHECK(reports[6].combo.name() == "N234");
  // rerun is identical
  CHECK(run_experiment_suite(d, spec) == reports);
}

TEST_CASE("every model kind trains and evaluates") {
  const auto d = make_dataset(small_campaign());
  SuiteSpec spec;
  spec.split = make_random_split(d.info.grid.size(), 5, 0.3, 3);
  spec.hyper = fast_hyper();
  spec.seed = 2;
  const auto dir = temp_dir("ckpt");
  spec.checkpoint_dir = dir;
  const std::vector<ModelKind> kinds{ModelKind::kTypeA, ModelKind::kTypeB, ModelKind::kTypeC, ModelKind::kBaseline};
  spec.experiments = {{nn::Task::kDetect, kinds, {LinkCombo::parse("N23")}},
                      {nn::Task::kPosition, kinds, {LinkCombo::parse("N234")}}};
  const auto reports = run_experiment_suite(d, spec);
  REQUIRE(reports.size() == 8);
  for (const auto& r : reports) {
    INFO(r.model_id << " " << r.combo.name() << " " << r.error.value_or(""));
    CHECK_FALSE(r.error);
    if (r.task == nn::Task::kDetect) {
      REQUIRE(r.accuracy);
      CHECK(*r.accuracy >= 0.0);
      CHECK(*r.accuracy <= 1.0);
      CHECK(r.test_count == 10);
    } else {
      REQUIRE(r.mean_error_m);
      CHECK(std::isfinite(*r.mean_error_m));
    }
  }
  CHECK_FALSE(reports[6].grid_table.empty());  // type-c position
  CHECK(reports[6].grid_table.size() == spec.hyper.grid.size());

  // checkpoints reload and reproduce their reports
  const auto split = split_campaign(d.samples, spec.split, d.info.grid.size());
  for (const auto& r : reports) {
    const auto path = dir / (std::string(nn::to_string(r.task)) + "-" + r.model_id + "-" + r.combo.name() + ".ckpt");
    REQUIRE(fs::exists(path));
    const auto m = load_model(path);
    const auto again = evaluate_model(*m, split.test, d.info.receiver_ids);
    CHECK(again.accuracy == r.accuracy);
    CHECK(again.mean_error_m == r.mean_error_m);
  }
}

TEST_CASE("link restriction ignores other links") {
  const auto d = make_dataset(small_campaign());
  const auto split = split_campaign(d.samples, make_random_split(d.info.grid.size(), 5, 0.3, 3), d.info.grid.size());
  const std::vector<int> only2{2};
  const ModelMeta meta{d.info.features, only2, "{}"};
  const auto hyper = fast_hyper();
  for (auto kind : {ModelKind::kTypeA, ModelKind::kTypeC, ModelKind::kBaseline}) {
    const auto train = restrict_links(split.train, only2);
    const auto val = restrict_links(split.val, only2);
    const auto model = train_model(kind, nn::Task::kPosition, train, val, hyper, meta, 5);
    auto perturbed = split.test;
    for (auto& s : perturbed) {
      const auto pos = static_cast<std::size_t>(link_positions(std::vector<int>{3}, s.link_ids)[0]);
      const auto len = static_cast<std::size_t>(s.features.layout.length * s.features.layout.channels_per_link);
      for (std::size_t k = 0; k < len; ++k) s.features.values[pos * len + k] += 3.0;
    }
    const auto a = evaluate_model(*model, split.test, d.info.receiver_ids);
    const auto b = evaluate_model(*model, perturbed, d.info.receiver_ids);
    CHECK(a.mean_error_m == b.mean_error_m);
    CHECK(a.error_cdf == b.error_cdf);
  }
}

TEST_CASE("split hygiene check catches leaks") {
  EvalReport r = sample_report(3);
  CHECK_NOTHROW(check_split_hygiene({r}));
  r.fit_bins = {1, 3, 8};
  CHECK_THROWS_AS(check_split_hygiene({r}), Error);
}

TEST_CASE("report formats") {
  const auto dir = temp_dir("reports");
  CHECK(reports_to_csv({}) == "model,combo,task,accuracy,mean_error_m\n");
  EvalReport det;
  det.task = nn::Task::kDetect;
  det.model_id = "typea";
  det.combo = LinkCombo::parse("N2");
  det.accuracy = 0.95;
  det.test_count = 250;
  const std::vector<EvalReport> rs{det, sample_report(7)};
  const auto csv = reports_to_csv(rs);
  CHECK(csv.find("typea,N2,detect,0.950000,\n") != std::string::npos);
  CHECK(csv.find("typeb,N234,position,,0.300000\n") != std::string::npos);

  const auto back = reports_from_json(reports_to_json(rs));
  CHECK(back == rs);

  emit_report(rs, ReportFormat::kJson, dir / "a.json");
  emit_report(load_reports(dir / "a.json"), ReportFormat::kJson, dir / "b.json");
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));

  emit_report(rs, ReportFormat::kSvg, dir / "a.svg");
  emit_report(rs, ReportFormat::kSvg, dir / "b.svg");
  const auto svg = slurp(dir / "a.svg");
  CHECK(svg == slurp(dir / "b.svg"));
  const std::regex poly(R"(<polyline[^>]*points="([^"]*)\")");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, poly));
  std::istringstream pts(m[1].str());
  std::string tok;
  int count = 0;
  while (pts >> tok) ++count;
  CHECK(count == 7);
  CHECK(parse_report_format("structured-text") == ReportFormat::kJson);
  CHECK_THROWS(parse_report_format("xml"));
  CHECK_THROWS_AS(reports_from_json("{\"format\":\"other\"}"), FormatError);
}

}  // TEST_SUITE
