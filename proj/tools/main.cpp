// Command-line front end: seeded simulation batches and statistical
// verification suites with machine-readable reports.
//
// Exit codes: 0 all checks pass, 1 usage/config error, 2 statistical check
// failure, 3 numerical (quadrature/tabulation) failure.

#include <array>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bimeixner/errors.hpp"
#include "bimeixner/report.hpp"
#include "bimeixner/stats.hpp"

namespace {

using namespace bimeixner;

struct Options {
  std::string family = "wiener";
  double q = 0.5;
  double p = 0.0;
  double r = 1.0;
  long paths = 1000000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  double z_max = 4.0;
  std::string out;
  std::string format = "json";
  std::string grid_spec;
  std::string pairs_spec = "0.3:0.7,0.5:2,1:1,1.5:3";
  std::string triples_spec;
  std::string x_spec;
  double theta = 0.0;
  double t = 1.0;
  double u = 2.0;
  double s = 0.5;
  double x = 0.0;
  std::string process = "z";
};

std::vector<double> parse_list(const std::string& spec, char sep = ',') {
  std::vector<double> out;
  std::stringstream stream(spec);
  std::string item;
  while (std::getline(stream, item, sep)) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::pair<double, double>> parse_pairs(const std::string& spec) {
  std::vector<std::pair<double, double>> out;
  std::stringstream stream(spec);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const std::vector<double> v = parse_list(item, ':');
    if (v.size() != 2) throw ArgumentError("bad pair '" + item + "'");
    out.emplace_back(v[0], v[1]);
  }
  return out;
}

std::vector<std::array<double, 3>> parse_triples(const std::string& spec) {
  std::vector<std::array<double, 3>> out;
  std::stringstream stream(spec);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const std::vector<double> v = parse_list(item, ':');
    if (v.size() != 3) throw ArgumentError("bad triple '" + item + "'");
    out.push_back({v[0], v[1], v[2]});
  }
  return out;
}

const std::vector<std::array<double, 3>> kHarnessTriples = {
    {0.2, 0.5, 0.8}, {1.25, 2.0, 4.0}, {0.5, 1.0, 2.0}, {0.5, 1.5, 3.0}};
const std::vector<std::array<double, 3>> kQvarTriples = {
    {0.2, 0.5, 0.8}, {0.5, 1.0, 2.0}, {0.5, 1.5, 3.0}};

// Worker count is an execution detail and must not affect report bytes, so
// it is not part of the configuration echo.
nlohmann::json config_echo(const Options& opt) {
  return {{"family", opt.family}, {"q", opt.q},         {"p", opt.p},
          {"r", opt.r},           {"paths", opt.paths}, {"seed", opt.seed},
          {"z_max", opt.z_max}};
}

TimeGrid grid_for(const Options& opt,
                  const std::vector<std::pair<double, double>>& pairs,
                  const std::vector<std::array<double, 3>>& triples) {
  std::vector<double> times;
  if (!opt.grid_spec.empty()) times = parse_list(opt.grid_spec);
  for (const auto& [a, b] : pairs) {
    times.push_back(a);
    times.push_back(b);
  }
  for (const auto& t3 : triples) times.insert(times.end(), t3.begin(), t3.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return TimeGrid(times);
}

void run_covariance(const Options& opt, RunReport& report) {
  const FamilySpec family = parse_family(opt.family, opt.q);
  const auto pairs = parse_pairs(opt.pairs_spec);
  const StitchConfig config = make_stitch_config(family, opt.p, opt.r);
  const PathBatch batch = simulate_z(config, grid_for(opt, pairs, {}),
                                     static_cast<int>(opt.paths), opt.seed,
                                     opt.threads);
  for (const MomentCheckReport& check : covariance_check(batch, pairs, opt.z_max)) {
    report.add(check);
  }
}

void run_harness(const Options& opt, RunReport& report) {
  const FamilySpec family = parse_family(opt.family, opt.q);
  const auto triples = opt.triples_spec.empty() ? kHarnessTriples
                                                : parse_triples(opt.triples_spec);
  const StitchConfig config = make_stitch_config(family, opt.p, opt.r);
  const PathBatch batch = simulate_z(config, grid_for(opt, {}, triples),
                                     static_cast<int>(opt.paths), opt.seed,
                                     opt.threads);
  for (const auto& [s, t, u] : triples) {
    report.add(harness_regression(batch, s, t, u, opt.z_max));
  }
}

void run_qvar(const Options& opt, RunReport& report) {
  const FamilySpec family = parse_family(opt.family, opt.q);
  const auto triples =
      opt.triples_spec.empty() ? kQvarTriples : parse_triples(opt.triples_spec);
  double domain_boundary = 0.0;
  switch (family.kind) {
    case FamilyKind::Gamma:
    case FamilyKind::NegativeBinomial: domain_boundary = 1.0; break;
    case FamilyKind::HyperbolicSecant: domain_boundary = 0.5; break;
    default: break;
  }
  if (opt.r < domain_boundary + 1.0) {
    std::cerr << "warning: r = " << opt.r << " is within 1 of the domain boundary "
              << domain_boundary
              << "; variance-regression z-scores may be poorly calibrated\n";
  }
  const StitchConfig config = make_stitch_config(family, opt.p, opt.r);
  const QHParams params = qh_params_from_theorem(family, opt.p, opt.r);
  const PathBatch batch = simulate_z(config, grid_for(opt, {}, triples),
                                     static_cast<int>(opt.paths), opt.seed,
                                     opt.threads);
  for (const auto& [s, t, u] : triples) {
    report.add(qvar_regression(batch, s, t, u, params, opt.z_max));
  }
}

void run_moments(const Options& opt, RunReport& report, bool monte_carlo) {
  const FamilySpec family = parse_family(opt.family, opt.q);
  const RandomizationLaw law = make_randomization_law(family, opt.p, opt.r);
  const KPrimeMoments closed = kprime_moments(law);
  const KPrimeMoments quad = kprime_moments_by_quadrature(law);
  report.add(make_moment_check("kprime_mean_quadrature", quad.mean, closed.mean,
                               std::max(std::abs(closed.mean), 1e-6) * 1e-8 / 4.0,
                               0, opt.z_max));
  report.add(make_moment_check("kprime_var_quadrature", quad.variance,
                               closed.variance, closed.variance * 1e-8 / 4.0, 0,
                               opt.z_max));
  if (monte_carlo && opt.paths > 0) {
    std::vector<double> draws(opt.paths);
    for (long i = 0; i < opt.paths; ++i) {
      RandomStream rng(opt.seed, static_cast<std::uint64_t>(i));
      draws[i] = cumulants(family, sample_theta(law, rng)).kappa_prime;
    }
    const double mean = sample_mean(draws);
    const double var = sample_variance(draws);
    const double mean_se = std::sqrt(var / opt.paths);
    double m4 = 0.0;
    for (double d : draws) {
      const double c = d - mean;
      m4 += c * c * c * c;
    }
    m4 /= opt.paths;
    const double var_se = std::sqrt(std::max(0.0, m4 - var * var) / opt.paths);
    report.add(make_moment_check("kprime_mean_mc", mean, closed.mean, mean_se,
                                 opt.paths, opt.z_max));
    report.add(make_moment_check("kprime_var_mc", var, closed.variance, var_se,
                                 opt.paths, opt.z_max));
  }
}

void run_identities(const Options& opt, RunReport& report) {
  const FamilySpec family = parse_family(opt.family, opt.q);
  const int n = static_cast<int>(opt.paths);
  report.add(identity_amazing(family, opt.p, opt.r, 1.5, n, opt.seed, opt.z_max));
  report.add(identity_amazing_quadrature(family, opt.p, opt.r));
  report.add(identity_minivv(family, 0.0, 1.0, 2.0,
                             std::min(n, 200000), opt.seed + 1));
  const RandomizationLaw law = make_randomization_law(family, opt.p, opt.r);
  const PathBatch y_batch = simulate_y(law, TimeGrid({1.0, 2.0}), n, opt.seed + 2,
                                       opt.threads);
  report.add(martingale_check(y_batch, 1.0, 2.0, opt.p, opt.r, opt.z_max));
  report.add(theta_mean_given_y_check(y_batch, 1.0, opt.p, opt.r, opt.z_max));
  const StitchConfig config = make_stitch_config(family, opt.p, opt.r);
  const PathBatch z_batch = simulate_z(config, TimeGrid({0.5, 1.0, 2.0}), n,
                                       opt.seed + 3, opt.threads);
  report.add(theta_posterior_check(z_batch, 0.5, 2.0, opt.p, opt.r, opt.z_max));
}

void run_assumptions(const Options& opt, RunReport& report) {
  const FamilySpec family = parse_family(opt.family, opt.q);
  const std::vector<double> points = opt.x_spec.empty()
                                         ? default_support_points(family)
                                         : parse_list(opt.x_spec);
  const AssumptionReport assumptions =
      check_assumptions(family, opt.p, opt.r, points);
  for (const AssumptionEndpointStatus& entry : assumptions.entries) {
    CheckLine line;
    line.name = "assumptions(x=" + std::to_string(entry.x) + "," +
                (entry.upper_endpoint ? "upper" : "lower") + ")";
    line.theory = 1.0;
    line.estimate = (entry.decay_pass && entry.weighted_decay_pass) ? 1.0 : 0.0;
    line.std_error = 0.0;
    line.z = line.estimate == line.theory ? 0.0 : 1e300;
    line.pass = entry.decay_pass && entry.weighted_decay_pass;
    report.add(line);
  }
}

void run_params(const Options& opt, RunReport& report) {
  const FamilySpec family = parse_family(opt.family, opt.q);
  const QHParams params = qh_params_from_theorem(family, opt.p, opt.r);
  auto emit = [&report](const std::string& name, double value) {
    CheckLine line{name, value, value, 0.0, 0.0, true};
    report.add(line);
  };
  emit("alpha", params.alpha);
  emit("beta", params.beta);
  emit("sigma", params.sigma);
  emit("tau", params.tau);
  emit("gamma", params.gamma);
}

void run_density(const Options& opt, RunReport& report) {
  const FamilySpec family = parse_family(opt.family, opt.q);
  const double value = increment_density(family, opt.theta, opt.t, opt.x);
  CheckLine line{"density(theta=" + std::to_string(opt.theta) +
                     ",t=" + std::to_string(opt.t) + ",x=" + std::to_string(opt.x) +
                     ")",
                 value, value, 0.0, 0.0, true};
  report.add(line);
}

int run_simulate(const Options& opt) {
  const FamilySpec family = parse_family(opt.family, opt.q);
  if (opt.grid_spec.empty()) throw ArgumentError("simulate: --grid is required");
  const TimeGrid grid(parse_list(opt.grid_spec));
  const PathBatch batch = [&]() {
    if (opt.process == "y") {
      return simulate_y(make_randomization_law(family, opt.p, opt.r), grid,
                        static_cast<int>(opt.paths), opt.seed, opt.threads);
    }
    if (opt.process == "z") {
      return simulate_z(make_stitch_config(family, opt.p, opt.r), grid,
                        static_cast<int>(opt.paths), opt.seed, opt.threads);
    }
    throw ArgumentError("simulate: --process must be y or z");
  }();
  std::ostringstream out;
  out.precision(17);
  out << "path,theta";
  for (double t : grid.times()) out << ',' << (opt.process == "y" ? 'Y' : 'Z') << '(' << t << ')';
  out << '\n';
  for (int i = 0; i < batch.n_paths(); ++i) {
    out << i << ',' << batch.thetas[i];
    for (std::size_t j = 0; j < grid.size(); ++j) out << ',' << batch.values(i, j);
    out << '\n';
  }
  if (!opt.out.empty()) {
    std::ofstream file(opt.out);
    file << out.str();
  } else {
    std::cout << out.str();
  }
  return 0;
}

int emit_report(const Options& opt, const RunReport& report) {
  const std::string text =
      opt.format == "csv" ? to_csv_string(report) : to_json_string(report);
  if (!opt.out.empty()) {
    std::ofstream file(opt.out);
    file << text;
    if (opt.format != "csv") file << '\n';
  } else {
    std::cout << text;
    if (opt.format != "csv") std::cout << '\n';
  }
  return report.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stitched Levy-Meixner processes: simulation and quadratic-harness verification"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&opt](CLI::App* cmd, bool needs_seed) {
    cmd->add_option("--family", opt.family,
                    "wiener|poisson|gamma|negative-binomial|secant");
    cmd->add_option("--q", opt.q, "negative binomial success parameter");
    cmd->add_option("--p", opt.p, "randomization parameter p");
    cmd->add_option("--r", opt.r, "randomization parameter r");
    cmd->add_option("--paths", opt.paths, "number of Monte Carlo paths");
    auto* seed = cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&opt](std::uint64_t v) {
          opt.seed = v;
          opt.seed_set = true;
        },
        "master seed (required for verify-* subcommands)");
    if (needs_seed) seed->required();
    cmd->add_option("--threads", opt.threads, "worker threads (0 = auto)");
    cmd->add_option("--z-max", opt.z_max, "per-check z threshold");
    cmd->add_option("--out", opt.out, "output file (default stdout)");
    cmd->add_option("--format", opt.format, "json|csv");
    cmd->set_config("--config");
    return cmd;
  };

  auto* params = add_common(app.add_subcommand("params", "quadratic-harness parameters"), false);
  auto* moments = add_common(app.add_subcommand("moments", "moments of kappa'(Theta)"), false);
  auto* simulate = add_common(app.add_subcommand("simulate", "emit a path batch as CSV"), true);
  simulate->add_option("--grid", opt.grid_spec, "comma-separated times");
  simulate->add_option("--process", opt.process, "y|z");
  auto* density = add_common(app.add_subcommand("density", "increment density"), false);
  density->add_option("--theta", opt.theta);
  density->add_option("--t", opt.t);
  density->add_option("--x", opt.x);
  auto* vcov = add_common(app.add_subcommand("verify-covariance", "cov(Z_s,Z_u) = min(s,u)"), true);
  vcov->add_option("--pairs", opt.pairs_spec, "s:u,...");
  auto* vharness = add_common(app.add_subcommand("verify-harness", "linear interpolation regression"), true);
  vharness->add_option("--triples", opt.triples_spec, "s:t:u,...");
  auto* vqvar = add_common(app.add_subcommand("verify-qvar", "conditional variance regression"), true);
  vqvar->add_option("--triples", opt.triples_spec, "s:t:u,...");
  auto* vident = add_common(app.add_subcommand("verify-identities", "auxiliary identities"), true);
  auto* vassume = add_common(app.add_subcommand("check-assumptions", "boundary decay assumptions"), false);
  vassume->add_option("--x", opt.x_spec, "support probe points");
  auto* vall = add_common(app.add_subcommand("verify-all", "all verification suites"), true);
  vall->add_option("--pairs", opt.pairs_spec, "s:u,...");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage/config errors exit 1
  }

  const auto started = std::chrono::steady_clock::now();
  RunReport report;
  report.seed = opt.seed;
  report.config = config_echo(opt);
  try {
    if (simulate->parsed()) return run_simulate(opt);
    if (params->parsed()) run_params(opt, report);
    if (moments->parsed()) run_moments(opt, report, opt.seed_set);
    if (density->parsed()) run_density(opt, report);
    if (vcov->parsed()) run_covariance(opt, report);
    if (vharness->parsed()) run_harness(opt, report);
    if (vqvar->parsed()) run_qvar(opt, report);
    if (vident->parsed()) run_identities(opt, report);
    if (vassume->parsed()) run_assumptions(opt, report);
    if (vall->parsed()) {
      run_params(opt, report);
      run_moments(opt, report, true);
      run_assumptions(opt, report);
      run_covariance(opt, report);
      run_harness(opt, report);
      run_qvar(opt, report);
      run_identities(opt, report);
    }
  } catch (const IntegrationError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const TabulationError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const SingularDesignError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  std::cerr << "wall-clock: " << elapsed << " s\n";
  return emit_report(opt, report);
}
