#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cirsense/eval/suite.hpp"

namespace cirsense::eval {

enum class ReportFormat { kCsv, kJson, kSvg };

ReportFormat parse_report_format(std::string_view s);

/// CSV columns: model,combo,task,accuracy,mean_error_m (absent values empty).
std::string reports_to_csv(const std::vector<EvalReport>& reports);
/// Complete reports, including CDFs, grid tables and config snapshots.
std::string reports_to_json(const std::vector<EvalReport>& reports);
std::vector<EvalReport> reports_from_json(std::string_view text);
/// Error CDF plot, one polyline per positioning report.
std::string reports_to_svg(const std::vector<EvalReport>& reports);

void emit_report(const std::vector<EvalReport>& reports, ReportFormat format,
                 const std::filesystem::path& path);
std::vector<EvalReport> load_reports(const std::filesystem::path& json_path);

}  // namespace cirsense::eval
