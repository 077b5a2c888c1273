#include "cirsense/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <stdexcept>

#include "cirsense/binary_io.hpp"
#include "cirsense/serialization.hpp"

namespace cirsense::eval {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

json report_json(const EvalReport& r) {
  json cdf = json::array();
  for (const auto& [e, f] : r.error_cdf) cdf.push_back({e, f});
  json table = json::array();
  for (const auto& s : r.grid_table)
    table.push_back({{"n_estimators", s.n_estimators},
                     {"max_depth", s.max_depth},
                     {"learning_rate", s.learning_rate},
                     {"val_mse", s.val_mse}});
  json j = {{"task", std::string(nn::to_string(r.task))},
            {"model", r.model_id},
            {"combo", r.combo.name()},
            {"receiver_ids", r.combo.receiver_ids},
            {"accuracy", r.accuracy ? json(*r.accuracy) : json(nullptr)},
            {"mean_error_m", r.mean_error_m ? json(*r.mean_error_m) : json(nullptr)},
            {"error_cdf", cdf},
            {"test_count", r.test_count},
            {"seed", r.seed},
            {"error", r.error ? json(*r.error) : json(nullptr)},
            {"fit_bins", r.fit_bins},
            {"test_bins", r.test_bins},
            {"grid_table", table},
            {"config_snapshot", r.config_snapshot}};
  return j;
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  r.task = nn::parse_task(j.at("task").get<std::string>());
  r.model_id = j.at("model").get<std::string>();
  r.combo = LinkCombo::from_ids(j.at("receiver_ids").get<std::vector<int>>());
  if (!j.at("accuracy").is_null()) r.accuracy = j.at("accuracy").get<double>();
  if (!j.at("mean_error_m").is_null()) r.mean_error_m = j.at("mean_error_m").get<double>();
  for (const auto& p : j.at("error_cdf")) r.error_cdf.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  r.test_count = j.at("test_count").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  r.fit_bins = j.at("fit_bins").get<std::vector<int>>();
  r.test_bins = j.at("test_bins").get<std::vector<int>>();
  for (const auto& s : j.at("grid_table"))
    r.grid_table.push_back({s.at("n_estimators").get<int>(), s.at("max_depth").get<int>(),
                            s.at("learning_rate").get<double>(), s.at("val_mse").get<double>()});
  r.config_snapshot = j.at("config_snapshot").get<std::string>();
  return r;
}

}  // namespace

ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "json" || s == "structured-text") return ReportFormat::kJson;
  if (s == "svg" || s == "svg-plot") return ReportFormat::kSvg;
  throw std::invalid_argument("unknown report format '" + std::string(s) + "'");
}

std::string reports_to_csv(const std::vector<EvalReport>& reports) {
  std::string out = "model,combo,task,accuracy,mean_error_m\n";
  for (const auto& r : reports) {
    out += csv_field(r.model_id) + "," + r.combo.name() + "," + std::string(nn::to_string(r.task)) + ",";
    if (r.accuracy) out += fmt("%.6f", *r.accuracy);
    out += ",";
    if (r.mean_error_m) out += fmt("%.6f", *r.mean_error_m);
    out += "\n";
  }
  return out;
}

std::string reports_to_json(const std::vector<EvalReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return json{{"format", "cirsense-reports"}, {"version", 1}, {"reports", arr}}.dump(1) + "\n";
}

std::vector<EvalReport> reports_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "cirsense-reports") throw FormatError("not a report file");
    if (j.at("version") != 1) throw FormatError("unsupported report version");
    std::vector<EvalReport> out;
    for (const auto& r : j.at("reports")) out.push_back(report_from_json(r));
    return out;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report file: ") + e.what());
  }
}

std::string reports_to_svg(const std::vector<EvalReport>& reports) {
  constexpr double kW = 640, kH = 440, kL = 60, kR = 150, kT = 20, kB = 50;
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  std::vector<const EvalReport*> curves;
  double max_err = 0.0;
  for (const auto& r : reports) {
    if (r.task != nn::Task::kPosition || r.error_cdf.empty()) continue;
    curves.push_back(&r);
    max_err = std::max(max_err, r.error_cdf.back().first);
  }
  // round the axis up to a whole number of half meters
  const double x_max = max_err > 0 ? std::ceil(max_err * 2.0) / 2.0 : 1.0;
  const auto px = [&](double e) { return kL + pw * e / x_max; };
  const auto py = [&](double f) { return kT + ph * (1.0 - f); };

  static const char* const kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                        "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", kW) + "\" height=\"" + fmt("%.0f", kH) +
       "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<g stroke=\"black\" fill=\"none\">\n";
  s += "<line x1=\"" + fmt("%.2f", kL) + "\" y1=\"" + fmt("%.2f", py(0)) + "\" x2=\"" + fmt("%.2f", kL + pw) +
       "\" y2=\"" + fmt("%.2f", py(0)) + "\"/>\n";
  s += "<line x1=\"" + fmt("%.2f", kL) + "\" y1=\"" + fmt("%.2f", py(0)) + "\" x2=\"" + fmt("%.2f", kL) +
       "\" y2=\"" + fmt("%.2f", py(1)) + "\"/>\n";
  s += "</g>\n";
  const int xticks = static_cast<int>(std::lround(x_max / 0.5));
  const int step = std::max(1, xticks / 10);
  for (int i = 0; i <= xticks; i += step) {
    const double e = 0.5 * i;
    s += "<text x=\"" + fmt("%.2f", px(e)) + "\" y=\"" + fmt("%.2f", py(0) + 15) +
         "\" text-anchor=\"middle\">" + fmt("%.1f", e) + "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double f = 0.2 * i;
    s += "<text x=\"" + fmt("%.2f", kL - 6) + "\" y=\"" + fmt("%.2f", py(f) + 4) + "\" text-anchor=\"end\">" +
         fmt("%.1f", f) + "</text>\n";
  }
  s += "<text x=\"" + fmt("%.2f", kL + pw / 2) + "\" y=\"" + fmt("%.2f", kH - 12) +
       "\" text-anchor=\"middle\">position error (m)</text>\n";
  s += "<text x=\"15\" y=\"" + fmt("%.2f", kT + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " +
       fmt("%.2f", kT + ph / 2) + ")\">CDF</text>\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& r = *curves[c];
    const char* color = kColors[c % std::size(kColors)];
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < r.error_cdf.size(); ++i) {
      if (i) s += ' ';
      s += fmt("%.2f", px(r.error_cdf[i].first)) + "," + fmt("%.2f", py(r.error_cdf[i].second));
    }
    s += "\"/>\n";
    const double ly = kT + 14.0 * static_cast<double>(c + 1);
    s += "<line x1=\"" + fmt("%.2f", kL + pw + 10) + "\" y1=\"" + fmt("%.2f", ly - 4) + "\" x2=\"" +
         fmt("%.2f", kL + pw + 30) + "\" y2=\"" + fmt("%.2f", ly - 4) + "\" stroke=\"" + color + "\"/>\n";
    s += "<text x=\"" + fmt("%.2f", kL + pw + 34) + "\" y=\"" + fmt("%.2f", ly) + "\">" +
         xml_escape(r.model_id + " " + r.combo.name()) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

void emit_report(const std::vector<EvalReport>& reports, ReportFormat format,
                 const std::filesystem::path& path) {
  switch (format) {
    case ReportFormat::kCsv: io::write_text(path, reports_to_csv(reports)); break;
    case ReportFormat::kJson: io::write_text(path, reports_to_json(reports)); break;
    case ReportFormat::kSvg: io::write_text(path, reports_to_svg(reports)); break;
  }
}

std::vector<EvalReport> load_reports(const std::filesystem::path& json_path) {
  return reports_from_json(io::read_text(json_path));
}

}  // namespace cirsense::eval
