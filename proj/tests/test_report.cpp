#include <doctest.h>

#include <string>

#include "bimeixner/report.hpp"

using namespace bimeixner;

namespace {
RunReport sample_report() {
  RunReport report;
  report.seed = 42;
  report.config = {{"family", "poisson"}, {"p", 4.0}, {"r", 1.0}};
  report.add(make_moment_check("cov(0.3,0.7)", 0.2999, 0.3, 0.0005, 1000000));
  report.add(make_moment_check("amazing_mc", 1.502, 1.5, 0.01, 1000000));
  return report;
}
}  // namespace

TEST_CASE("JSON round trip preserves every field") {
  const RunReport report = sample_report();
  const std::string text = to_json_string(report);
  const RunReport parsed = run_report_from_json(text);
  CHECK(parsed.seed == report.seed);
  CHECK(parsed.pass == report.pass);
  CHECK(parsed.checks.size() == report.checks.size());
  for (std::size_t i = 0; i < parsed.checks.size(); ++i) {
    CHECK(parsed.checks[i].name == report.checks[i].name);
    CHECK(parsed.checks[i].theory == report.checks[i].theory);
    CHECK(parsed.checks[i].estimate == report.checks[i].estimate);
    CHECK(parsed.checks[i].std_error == report.checks[i].std_error);
    CHECK(parsed.checks[i].z == report.checks[i].z);
    CHECK(parsed.checks[i].pass == report.checks[i].pass);
  }
  CHECK(parsed.config.at("family") == "poisson");
  // a second serialization is byte-identical
  CHECK(to_json_string(parsed) == text);
}

TEST_CASE("keys are emitted in sorted order") {
  // top-level keys sit at two-space indentation in the dump
  const std::string text = to_json_string(sample_report());
  const std::size_t checks_pos = text.find("\n  \"checks\"");
  const std::size_t config_pos = text.find("\n  \"config\"");
  const std::size_t pass_pos = text.find("\n  \"pass\"");
  const std::size_t seed_pos = text.find("\n  \"seed\"");
  const std::size_t version_pos = text.find("\n  \"version\"");
  CHECK(checks_pos < config_pos);
  CHECK(config_pos < pass_pos);
  CHECK(pass_pos < seed_pos);
  CHECK(seed_pos < version_pos);
}

TEST_CASE("overall pass aggregates component checks") {
  RunReport report = sample_report();
  CHECK(report.pass);
  report.add(make_moment_check("broken", 10.0, 0.0, 0.1, 100));
  CHECK_FALSE(report.pass);
}

TEST_CASE("CSV rows carry theory, estimate, and standard error") {
  const std::string csv = to_csv_string(sample_report());
  CHECK(csv.find("name,theory,estimate,std_error,z,pass") == 0);
  CHECK(csv.find("cov(0.3,0.7),0.29999999999999999") != std::string::npos);
  CHECK(csv.find(",1\n") != std::string::npos);
}

TEST_CASE("regression reports flatten to per-coefficient lines") {
  RegressionReport reg;
  reg.name = "harness";
  reg.coefficients = Eigen::VectorXd::Zero(3);
  reg.theory_coefficients = Eigen::VectorXd::Zero(3);
  reg.covariance_of_estimates = Eigen::MatrixXd::Identity(3, 3);
  reg.z_scores = Eigen::VectorXd::Zero(3);
  reg.pass = true;
  reg.n = 10;
  const std::vector<CheckLine> lines = to_check_lines(reg);
  CHECK(lines.size() == 3);
  CHECK(lines[0].name == "harness.coef0");
  CHECK(lines[2].name == "harness.coef2");
}
