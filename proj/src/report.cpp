#include "bimeixner/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bimeixner {

CheckLine to_check_line(const MomentCheckReport& report) {
  return {report.name, report.theory, report.estimate, report.std_error,
          report.z_score, report.pass};
}

std::vector<CheckLine> to_check_lines(const RegressionReport& report) {
  std::vector<CheckLine> lines;
  for (int j = 0; j < report.coefficients.size(); ++j) {
    const bool dropped =
        std::find(report.dropped_features.begin(), report.dropped_features.end(),
                  j) != report.dropped_features.end();
    CheckLine line;
    line.name = report.name + ".coef" + std::to_string(j) + (dropped ? ".dropped" : "");
    line.theory = report.theory_coefficients[j];
    line.estimate = report.coefficients[j];
    line.std_error = std::sqrt(std::max(0.0, report.covariance_of_estimates(j, j)));
    line.z = report.z_scores[j];
    line.pass = dropped || std::abs(line.z) <= 4.0;
    lines.push_back(line);
  }
  return lines;
}

void RunReport::add(CheckLine line) {
  pass = pass && line.pass;
  checks.push_back(std::move(line));
}

void RunReport::add(const MomentCheckReport& report) { add(to_check_line(report)); }

void RunReport::add(const RegressionReport& report) {
  for (CheckLine& line : to_check_lines(report)) add(std::move(line));
  pass = pass && report.pass;
}

std::string to_json_string(const RunReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckLine& line : report.checks) {
    checks.push_back({{"name", line.name},
                      {"theory", line.theory},
                      {"estimate", line.estimate},
                      {"std_error", line.std_error},
                      {"z", line.z},
                      {"pass", line.pass}});
  }
  const nlohmann::json doc = {{"config", report.config},
                              {"checks", checks},
                              {"pass", report.pass},
                              {"seed", report.seed},
                              {"version", kLibraryVersion}};
  return doc.dump(2);
}

RunReport run_report_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  RunReport report;
  report.config = doc.at("config");
  report.pass = doc.at("pass").get<bool>();
  report.seed = doc.at("seed").get<std::uint64_t>();
  for (const nlohmann::json& item : doc.at("checks")) {
    CheckLine line;
    line.name = item.at("name").get<std::string>();
    line.theory = item.at("theory").get<double>();
    line.estimate = item.at("estimate").get<double>();
    line.std_error = item.at("std_error").get<double>();
    line.z = item.at("z").get<double>();
    line.pass = item.at("pass").get<bool>();
    report.checks.push_back(line);
  }
  return report;
}

std::string to_csv_string(const RunReport& report) {
  std::ostringstream out;
  out << "name,theory,estimate,std_error,z,pass\n";
  out.precision(17);
  for (const CheckLine& line : report.checks) {
    out << line.name << ',' << line.theory << ',' << line.estimate << ','
        << line.std_error << ',' << line.z << ',' << (line.pass ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace bimeixner
