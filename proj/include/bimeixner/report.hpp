#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bimeixner/qh.hpp"

namespace bimeixner {

inline constexpr const char* kLibraryVersion = "0.1.0";

// One serialized check row: every reported number carries its theory value,
// estimate and standard error.
struct CheckLine {
  std::string name;
  double theory = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  bool pass = false;
};

CheckLine to_check_line(const MomentCheckReport& report);

// One line per coefficient, suffixed with the coefficient index.
std::vector<CheckLine> to_check_lines(const RegressionReport& report);

struct RunReport {
  nlohmann::json config;  // echo of the experiment configuration
  std::vector<CheckLine> checks;
  bool pass = true;
  std::uint64_t seed = 0;

  void add(CheckLine line);
  void add(const MomentCheckReport& report);
  void add(const RegressionReport& report);
};

// Canonical JSON with sorted keys: {config, checks, pass, seed, version}.
std::string to_json_string(const RunReport& report);
RunReport run_report_from_json(const std::string& text);

// Flat CSV, one row per check: name,theory,estimate,std_error,z,pass
std::string to_csv_string(const RunReport& report);

}  // namespace bimeixner
