// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   acceptance [--work-dir DIR] [--only 1,2,...] [--config PATH]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "cirsense/config.hpp"
#include "cirsense/dsp.hpp"
#include "cirsense/eval/suite.hpp"
#include "cirsense/gbt/tree.hpp"
#include "cirsense/nn/network.hpp"
#include "cirsense/pipeline.hpp"
#include "cirsense/sim.hpp"
#include "oracles.hpp"

using namespace cirsense;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome signal_model_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    SweepConfig c;
    c.num_points = 2 + static_cast<int>(u(rng) * 400);
    c.noise_std = 0;
    c.bandwidth_hz = 1e8 + u(rng) * 2e9;
    c.calibration_delay_s = 2e-9 * u(rng);
    std::vector<PropagationPath> paths;
    const int n = 1 + static_cast<int>(u(rng) * 12);
    for (int l = 0; l < n; ++l)
      paths.push_back({std::polar(u(rng), 6.283 * u(rng)), 150e-9 * u(rng), 40.0 * (u(rng) - 0.5)});
    double scale = 0;
    for (const auto& p : paths) scale += std::abs(p.gain);
    const auto got = synthesize_sweep(paths, c, 0).samples;
    const auto want = oracle::sweep(paths, c);
    for (std::size_t i = 0; i < got.size(); ++i) {
      const std::complex<double> w(static_cast<double>(want[i].real()), static_cast<double>(want[i].imag()));
      worst = std::max(worst, std::abs(got[i] - w) / scale);
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 10.0, "max rel err " + fmt("%.3e", worst) + ", " + fmt("%.2f", t) + " s"};
}

Outcome transform_oracle() {
  double worst = 0, worst_parseval = 0;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 1);
  for (int n : {4, 7, 64, 1001}) {
    std::vector<Complex> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = {g(rng), g(rng)};
    const auto fast = inverse_dft(x);
    const auto slow = oracle::idft(x);
    double xn = 0, yn = 0;
    for (const auto& v : x) xn += std::norm(v);
    for (const auto& v : fast) yn += std::norm(v);
    worst = std::max(worst, oracle::max_abs_diff(fast, slow));
    const double lhs = xn / n, rhs = yn;  // sum |y|^2 = sum |x|^2 / N
    worst_parseval = std::max(worst_parseval, std::abs(lhs - rhs) / lhs);
  }
  return {worst <= 1e-9 && worst_parseval <= 1e-9,
          "max abs diff " + fmt("%.3e", worst) + ", Parseval rel " + fmt("%.3e", worst_parseval)};
}

Outcome gradient_check() {
  using namespace nn;
  const auto t0 = Clock::now();
  double worst = 0;
  std::set<LayerKind> kinds;
  for (auto variant : {Variant::kTypeA, Variant::kTypeB}) {
    for (auto task : {Task::kDetect, Task::kPosition}) {
      NetworkSpec s;
      s.variant = variant;
      s.task = task;
      s.loss = task == Task::kDetect ? Loss::kBinaryCrossEntropy : Loss::kMeanSquaredError;
      s.num_links = 2;
      s.input_length = 16;
      s.per_pipeline = {LayerSpec::conv(4, 3, 1, 1), LayerSpec::relu(), LayerSpec::maxpool(2, 2),
                        LayerSpec::conv(4, 3, 2, 1), LayerSpec::relu(), LayerSpec::flatten()};
      s.fusion_head = {LayerSpec::dense(6), LayerSpec::relu(), LayerSpec::dense(s.outputs())};
      for (const auto& l : s.per_pipeline) kinds.insert(l.kind);
      for (const auto& l : s.fusion_head) kinds.insert(l.kind);
      const Network net(s);
      std::mt19937_64 rng(static_cast<std::uint64_t>(kinds.size() * 7 + static_cast<int>(task)));
      std::normal_distribution<double> g(0, 1);
      Tensor3 x(3, 2, 16);
      for (auto& v : x.data) v = g(rng);
      std::vector<double> y;
      for (int i = 0; i < 3 * s.outputs(); ++i) y.push_back(task == Task::kDetect ? (i % 2) : g(rng));
      std::vector<double> params(net.parameter_count());
      for (auto& p : params) p = 0.5 * g(rng);
      const auto analytic = net.loss_and_gradient(params, x, y).gradient;
      const auto numeric = oracle::numeric_gradient(
          [&](const std::vector<double>& p) { return net.loss(p, x, y); }, params, 1e-5);
      for (std::size_t i = 0; i < params.size(); ++i)
        worst = std::max(worst, oracle::relative_error(analytic[i], numeric[i]));
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-4 && kinds.size() == 5 && t < 60,
          "max rel err " + fmt("%.3e", worst) + " over " + std::to_string(kinds.size()) + " layer kinds, " +
              fmt("%.2f", t) + " s"};
}

Outcome split_oracle() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> u(0.1, 2);
  int agree = 0;
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 63);
    std::vector<double> gr, h, x;
    for (int i = 0; i < n; ++i) {
      gr.push_back(g(rng));
      h.push_back(trial % 2 ? 1.0 : u(rng));
      x.push_back(trial % 3 ? g(rng) : std::round(g(rng) * 2));
    }
    const double lambda = trial % 4 == 0 ? 0.0 : 1.0;
    const auto cand = gbt::propose_candidates(x, h, n + 1);
    const auto s = gbt::find_best_split(gr, h, x, cand, lambda, 0.0);
    const auto b = oracle::brute_force_split(gr, h, x, lambda, 0.0);
    bool same = s.has_value() == b.found;
    if (same && b.found) {
      worst = std::max(worst, std::abs(s->gain - b.gain));
      for (int i = 0; i < n; ++i) same = same && ((x[static_cast<std::size_t>(i)] < s->threshold) == b.goes_left[static_cast<std::size_t>(i)]);
      same = same && std::abs(s->gain - b.gain) <= 1e-9;
    }
    agree += same;
  }
  return {agree == 200, std::to_string(agree) + "/200 identical, max gain diff " + fmt("%.3e", worst)};
}

const eval::EvalReport* find(const std::vector<eval::EvalReport>& rs, nn::Task task, const std::string& model,
                             const std::string& combo) {
  for (const auto& r : rs)
    if (r.task == task && r.model_id == model && r.combo.name() == combo) return &r;
  return nullptr;
}

struct Campaign {
  std::vector<eval::EvalReport> detect, position;
  double detect_s = 0, position_s = 0;
  RunConfig cfg;
  Dataset data;
};

Campaign run_campaign(const RunConfig& cfg) {
  Campaign c;
  c.cfg = cfg;
  c.data = make_dataset(cfg.campaign(), cfg.snapshot());
  auto spec = cfg.suite();
  const auto all = spec.experiments;
  for (const auto& e : all) {
    spec.experiments = {e};
    const auto t0 = Clock::now();
    auto r = eval::run_experiment_suite(c.data, spec);
    const double t = seconds_since(t0);
    for (const auto& x : r) {
      std::cerr << "  " << nn::to_string(x.task) << " " << x.model_id << " " << x.combo.name() << ": ";
      if (x.error) std::cerr << "error " << *x.error;
      else if (x.accuracy) std::cerr << "accuracy " << *x.accuracy;
      else if (x.mean_error_m) std::cerr << "mean error " << *x.mean_error_m << " m";
      std::cerr << "\n";
    }
    auto& dst = e.task == nn::Task::kDetect ? c.detect : c.position;
    (e.task == nn::Task::kDetect ? c.detect_s : c.position_s) += t;
    dst.insert(dst.end(), r.begin(), r.end());
  }
  return c;
}

Outcome detection(const Campaign& c) {
  std::map<std::string, double> acc;
  for (const auto& r : c.detect)
    if (r.model_id == "typea" && r.accuracy) acc[r.combo.name()] = *r.accuracy;
  if (!acc.count("N2")) return {false, "no Type-A N2 detection report"};
  bool ok = acc["N2"] >= 0.90;
  std::ostringstream d;
  d << "N2 " << fmt("%.3f", acc["N2"]);
  for (const auto& [name, a] : acc) {
    if (name.size() <= 2) continue;
    double best_single = 0;
    for (std::size_t i = 1; i < name.size(); ++i) {
      const std::string single = std::string("N") + name[i];
      if (!acc.count(single)) return {false, "missing single-link report " + single};
      best_single = std::max(best_single, acc[single]);
    }
    const bool combo_ok = a >= best_single - 0.02;
    ok = ok && combo_ok;
    d << ", " << name << " " << fmt("%.3f", a) << (combo_ok ? "" : " (below best single " + fmt("%.3f", best_single) + ")");
  }
  if (acc.size() != 7) ok = false;
  ok = ok && c.detect_s < 600;
  d << "; " << fmt("%.0f", c.detect_s) << " s";
  return {ok, d.str()};
}

Outcome positioning(const Campaign& c) {
  using nn::Task;
  const auto* a2 = find(c.position, Task::kPosition, "typea", "N2");
  const auto* a = find(c.position, Task::kPosition, "typea", "N234");
  const auto* b = find(c.position, Task::kPosition, "typeb", "N234");
  const auto* cc = find(c.position, Task::kPosition, "typec", "N234");
  if (!a2 || !a || !b || !cc || !a2->mean_error_m || !a->mean_error_m || !b->mean_error_m || !cc->mean_error_m)
    return {false, "missing positioning reports"};
  const double ma2 = *a2->mean_error_m, ma = *a->mean_error_m, mb = *b->mean_error_m, mc = *cc->mean_error_m;
  const bool grid_ok = cc->grid_table.size() == 27;
  const bool ok = mc <= mb && mb <= ma + 0.05 && ma <= ma2 && c.position_s < 1800 && grid_ok;
  return {ok, "mu A(N2) " + fmt("%.3f", ma2) + ", A " + fmt("%.3f", ma) + ", B " + fmt("%.3f", mb) + ", C " +
                  fmt("%.3f", mc) + " m at N234; grid cells " + std::to_string(cc->grid_table.size()) + "; " +
                  fmt("%.0f", c.position_s) + " s"};
}

Outcome baseline_relation(const Campaign& c) {
  const auto* cc = find(c.position, nn::Task::kPosition, "typec", "N234");
  const auto* k = find(c.position, nn::Task::kPosition, "baseline", "N234");
  if (!cc || !k || !cc->mean_error_m || !k->mean_error_m) return {false, "missing reports"};
  return {*cc->mean_error_m <= *k->mean_error_m,
          "mu C " + fmt("%.3f", *cc->mean_error_m) + " m, baseline " + fmt("%.3f", *k->mean_error_m) + " m"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const fs::path& work) {
  RunConfig cfg;
  cfg.grid = GridSpec{};
  cfg.grid.n_cols = 6;
  cfg.grid.n_rows = 5;
  cfg.grid.expected_points.reset();
  cfg.sweep.num_points = 128;
  cfg.features.k_taps = 32;
  cfg.split.test_count = 8;
  cfg.hyper.nn.epochs = 3;
  cfg.hyper.arch.blocks = 2;
  cfg.hyper.arch.channels = 4;
  cfg.hyper.arch.dense_units = 8;
  cfg.hyper.grid = gbt::HyperGrid{{5, 10}, {2, 3}, {0.1, 0.3}};
  cfg.experiments = {{nn::Task::kDetect, {eval::ModelKind::kTypeA, eval::ModelKind::kTypeC}, {eval::LinkCombo::parse("N2"), eval::LinkCombo::parse("N34")}},
                     {nn::Task::kPosition,
                      {eval::ModelKind::kTypeA, eval::ModelKind::kTypeB, eval::ModelKind::kTypeC, eval::ModelKind::kBaseline},
                      {eval::LinkCombo::parse("N234")}}};
  std::vector<std::string> names{"reports.csv", "reports.json", "error_cdf.svg", "config.json"};
  std::vector<std::string> runs[2];
  // identical config means identical out_dir too; the snapshot records it
  cfg.out_dir = (work / "repro").string();
  for (int i = 0; i < 2; ++i) {
    fs::remove_all(cfg.out_dir);
    cmd_reproduce(cfg);
    for (const auto& n : names) runs[i].push_back(slurp(fs::path(cfg.out_dir) / n));
    runs[i].push_back(slurp(fs::path(cfg.out_dir) / "dataset.bin"));
  }
  bool same = true;
  for (std::size_t k = 0; k < runs[0].size(); ++k) same = same && !runs[0][k].empty() && runs[0][k] == runs[1][k];
  return {same, same ? "reports, plot, config and dataset byte-identical across two runs" : "outputs differ"};
}

Outcome split_hygiene(const Campaign& c) {
  // independent recomputation from the split and the dataset
  const auto spec = c.cfg.split_spec();
  const auto split = split_campaign(c.data.samples, spec, c.data.info.grid.size());
  std::set<int> fit, test;
  for (const auto& s : split.train) fit.insert(s.bin);
  for (const auto& s : split.val) fit.insert(s.bin);
  for (const auto& s : split.test) test.insert(s.bin);
  bool disjoint = true;
  for (int b : test) disjoint = disjoint && !fit.count(b);
  int cells = 0;
  bool reports_ok = true;
  std::vector<eval::EvalReport> all = c.detect;
  all.insert(all.end(), c.position.begin(), c.position.end());
  for (const auto& r : all) {
    ++cells;
    if (r.error || r.fit_bins.empty() || r.test_bins.empty()) reports_ok = false;
    for (int b : r.test_bins) reports_ok = reports_ok && test.count(b) && !fit.count(b);
    for (int b : r.fit_bins) reports_ok = reports_ok && fit.count(b) && !test.count(b);
  }
  try {
    eval::check_split_hygiene(all);
  } catch (const Error&) {
    reports_ok = false;
  }
  return {disjoint && reports_ok && cells > 0,
          std::to_string(cells) + " suite cells, " + std::to_string(test.size()) + " test bins, " +
              std::to_string(fit.size()) + " fit bins, intersection " + (disjoint ? "empty" : "NON-EMPTY")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string work = (fs::temp_directory_path() / "cirsense-acceptance").string();
  std::string only, config;
  app.add_option("--work-dir", work);
  app.add_option("--only", only, "comma-separated criterion numbers");
  app.add_option("--config", config, "run configuration for the campaign criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  std::set<int> want;
  if (only.empty()) {
    for (int i = 1; i <= 9; ++i) want.insert(i);
  } else {
    std::stringstream ss(only);
    std::string tok;
    while (std::getline(ss, tok, ',')) want.insert(std::stoi(tok));
  }

  const std::map<int, std::string> title{{1, "signal model oracle"},
                                         {2, "transform oracle"},
                                         {3, "gradient check"},
                                         {4, "gbt split oracle"},
                                         {5, "detection accuracy"},
                                         {6, "positioning ordering"},
                                         {7, "baseline relation"},
                                         {8, "end-to-end determinism"},
                                         {9, "split hygiene"}};
  int failed = 0;
  auto report = [&](int id, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << title.at(id) << "): " << o.detail
              << std::endl;
    failed += !o.pass;
  };
  auto guarded = [&](int id, auto&& fn) {
    if (!want.count(id)) return;
    try {
      report(id, fn());
    } catch (const std::exception& e) {
      report(id, {false, std::string("exception: ") + e.what()});
    }
  };

  guarded(1, signal_model_oracle);
  guarded(2, transform_oracle);
  guarded(3, gradient_check);
  guarded(4, split_oracle);

  if (want.count(5) || want.count(6) || want.count(7) || want.count(9)) {
    std::optional<Campaign> campaign;
    std::string failure;
    try {
      const RunConfig cfg = config.empty() ? RunConfig{} : load_config(config);
      campaign = run_campaign(cfg);
    } catch (const std::exception& e) {
      failure = std::string("campaign failed: ") + e.what();
    }
    for (int id : {5, 6, 7}) {
      if (!want.count(id)) continue;
      if (!campaign) {
        report(id, {false, failure});
        continue;
      }
      guarded(id, [&] { return id == 5 ? detection(*campaign) : id == 6 ? positioning(*campaign) : baseline_relation(*campaign); });
    }
    if (want.count(8)) guarded(8, [&] { return determinism(work); });
    if (want.count(9)) {
      if (campaign) guarded(9, [&] { return split_hygiene(*campaign); });
      else report(9, {false, failure});
    }
  } else {
    guarded(8, [&] { return determinism(work); });
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : std::string("acceptance: all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
