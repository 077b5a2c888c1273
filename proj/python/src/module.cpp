#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <limits>

#include "cirsense/config.hpp"
#include "cirsense/dsp.hpp"
#include "cirsense/eval/report.hpp"
#include "cirsense/gbt/ensemble.hpp"
#include "cirsense/pipeline.hpp"
#include "cirsense/sim.hpp"

namespace py = pybind11;
using namespace cirsense;

namespace {

RunConfig config_of(const std::optional<std::string>& text) {
  return text ? parse_config(*text) : RunConfig{};
}

py::dict dataset_dict(const Dataset& d) {
  const auto n = static_cast<py::ssize_t>(d.samples.size());
  const auto& lay = d.info.layout;
  py::array_t<double> features({n, static_cast<py::ssize_t>(lay.channel_count()), static_cast<py::ssize_t>(lay.length)});
  py::array_t<std::int8_t> hyp(n);
  py::array_t<int> bins(n);
  py::array_t<double> pos({n, py::ssize_t{2}});
  auto f = features.mutable_unchecked<3>();
  auto h = hyp.mutable_unchecked<1>();
  auto b = bins.mutable_unchecked<1>();
  auto p = pos.mutable_unchecked<2>();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& s = d.samples[static_cast<std::size_t>(i)];
    std::size_t k = 0;
    for (py::ssize_t c = 0; c < f.shape(1); ++c)
      for (py::ssize_t t = 0; t < f.shape(2); ++t) f(i, c, t) = s.features.values[k++];
    h(i) = static_cast<std::int8_t>(s.hypothesis);
    b(i) = s.bin;
    p(i, 0) = s.position_m ? s.position_m->x : nan;
    p(i, 1) = s.position_m ? s.position_m->y : nan;
  }
  py::dict out;
  out["features"] = features;
  out["hypothesis"] = hyp;
  out["bin"] = bins;
  out["position_m"] = pos;
  out["receiver_ids"] = d.info.receiver_ids;
  out["grid"] = py::make_tuple(d.info.grid.n_cols, d.info.grid.n_rows, d.info.grid.cell_m);
  out["config_snapshot"] = d.info.config_snapshot;
  return out;
}

py::dict report_dict(const eval::EvalReport& r) {
  py::dict d;
  d["task"] = std::string(nn::to_string(r.task));
  d["model"] = r.model_id;
  d["combo"] = r.combo.name();
  d["accuracy"] = r.accuracy ? py::cast(*r.accuracy) : py::none();
  d["mean_error_m"] = r.mean_error_m ? py::cast(*r.mean_error_m) : py::none();
  d["error_cdf"] = r.error_cdf;
  d["test_count"] = r.test_count;
  d["seed"] = r.seed;
  d["error"] = r.error ? py::cast(*r.error) : py::none();
  return d;
}

py::list reports_list(const std::vector<eval::EvalReport>& rs) {
  py::list out;
  for (const auto& r : rs) out.append(report_dict(r));
  return out;
}

gbt::FeatureMatrix matrix_of(const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
  if (x.ndim() != 2) throw py::value_error("expected a 2-D feature array");
  gbt::FeatureMatrix m(static_cast<int>(x.shape(0)), static_cast<int>(x.shape(1)));
  std::copy(x.data(), x.data() + x.size(), m.values.begin());
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "cirsense native module";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);

  m.def("default_config", [] { return RunConfig{}.snapshot(); }, "Default run configuration as JSON text.");

  m.def(
      "synthesize_sweep",
      [](const std::vector<std::tuple<std::complex<double>, double, double>>& paths, int num_points,
         double bandwidth_hz, double center_frequency_hz, double noise_std, std::uint64_t seed) {
        SweepConfig c;
        c.num_points = num_points;
        c.bandwidth_hz = bandwidth_hz;
        c.center_frequency_hz = center_frequency_hz;
        c.noise_std = noise_std;
        std::vector<PropagationPath> p;
        for (const auto& [g, d, f] : paths) p.push_back({g, d, f});
        const auto s = synthesize_sweep(p, c, seed);
        return py::array_t<std::complex<double>>(static_cast<py::ssize_t>(s.samples.size()), s.samples.data());
      },
      py::arg("paths"), py::arg("num_points") = 1001, py::arg("bandwidth_hz") = 1e9,
      py::arg("center_frequency_hz") = 28e9, py::arg("noise_std") = 0.0, py::arg("seed") = 0,
      "Frequency samples for (gain, delay_s, doppler_hz) paths.");

  m.def(
      "inverse_dft",
      [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& x) {
        if (x.ndim() != 1) throw py::value_error("expected a 1-D array");
        const auto y = inverse_dft(std::span(x.data(), static_cast<std::size_t>(x.size())));
        return py::array_t<std::complex<double>>(static_cast<py::ssize_t>(y.size()), y.data());
      },
      py::arg("x"), "Inverse DFT with 1/N scaling.");

  m.def(
      "simulate",
      [](const std::optional<std::string>& config, const std::optional<std::filesystem::path>& path) {
        const auto cfg = config_of(config);
        Dataset d;
        {
          py::gil_scoped_release release;
          d = path ? cmd_simulate(cfg, *path) : make_dataset(cfg.campaign(), cfg.snapshot());
        }
        return dataset_dict(d);
      },
      py::arg("config") = py::none(), py::arg("path") = py::none(),
      "Generate the synthetic campaign; optionally also write it to `path`.");

  m.def(
      "load_dataset", [](const std::filesystem::path& p) { return dataset_dict(load_dataset(p)); },
      py::arg("path"));

  m.def(
      "reproduce",
      [](const std::optional<std::string>& config, const std::optional<std::string>& out_dir) {
        auto cfg = config_of(config);
        if (out_dir) cfg.out_dir = *out_dir;
        std::vector<eval::EvalReport> rs;
        {
          py::gil_scoped_release release;
          rs = cmd_reproduce(cfg);
        }
        return reports_list(rs);
      },
      py::arg("config") = py::none(), py::arg("out_dir") = py::none(),
      "Simulate, run the configured suite and write reports; returns the reports.");

  m.def(
      "load_reports", [](const std::filesystem::path& p) { return reports_list(eval::load_reports(p)); },
      py::arg("path"));

  py::class_<gbt::Ensemble>(m, "GbtEnsemble")
      .def_property_readonly("outputs", &gbt::Ensemble::outputs)
      .def_property_readonly("n_features", [](const gbt::Ensemble& e) { return e.n_features; })
      .def_property_readonly("train_loss", [](const gbt::Ensemble& e) { return e.train_loss; })
      .def(
          "predict",
          [](const gbt::Ensemble& e, const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
            const auto fm = matrix_of(x);
            const auto p = e.predict(fm);
            py::array_t<double> out({static_cast<py::ssize_t>(fm.rows), static_cast<py::ssize_t>(e.outputs())});
            std::copy(p.begin(), p.end(), out.mutable_data());
            return out;
          },
          py::arg("x"));

  m.def(
      "fit_gbt",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& y, int n_estimators, int max_depth,
         double learning_rate, double lambda, double gamma, double subsample, std::uint64_t seed) {
        const auto fm = matrix_of(x);
        const int outputs = y.ndim() == 1 ? 1 : static_cast<int>(y.shape(1));
        if (y.shape(0) != fm.rows) throw py::value_error("x and y row counts differ");
        gbt::BoostConfig c;
        c.n_estimators = n_estimators;
        c.max_depth = max_depth;
        c.learning_rate = learning_rate;
        c.lambda = lambda;
        c.gamma = gamma;
        c.subsample = subsample;
        c.seed = seed;
        py::gil_scoped_release release;
        return gbt::fit_ensemble(fm, std::span(y.data(), static_cast<std::size_t>(y.size())), outputs, c);
      },
      py::arg("x"), py::arg("y"), py::arg("n_estimators") = 300, py::arg("max_depth") = 5,
      py::arg("learning_rate") = 0.1, py::arg("reg_lambda") = 1.0, py::arg("gamma") = 0.0,
      py::arg("subsample") = 1.0, py::arg("seed") = 0, "Fit a squared-loss boosted tree ensemble.");
}
