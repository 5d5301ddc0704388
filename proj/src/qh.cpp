#include "bimeixner/qh.hpp"

#include <algorithm>
#include <cmath>

#include "bimeixner/errors.hpp"
#include "bimeixner/stats.hpp"

namespace bimeixner {

QHParams qh_params_from_theorem(const FamilySpec& family, double p, double r) {
  // Domain validation is the randomization law's job; reuse it cheaply by
  // checking moments existence through kprime_moments on a throwaway law
  // would rebuild tables, so validate the Table-1 domain directly.
  const VarianceCoeffs coeffs = variance_coeffs(family);
  const double a = coeffs.a;
  if (!(r > a)) throw ArgumentError("qh_params_from_theorem: requires r > a");
  bool admissible = true;
  switch (family.kind) {
    case FamilyKind::Wiener: admissible = r > 0.0; break;
    case FamilyKind::Poisson: admissible = r > 0.0 && p > 0.0; break;
    case FamilyKind::Gamma: admissible = r > 1.0 && p > 0.0; break;
    case FamilyKind::NegativeBinomial: admissible = r > 1.0 && p > 0.0; break;
    case FamilyKind::HyperbolicSecant: admissible = r > 0.5; break;
  }
  if (!admissible) {
    throw ArgumentError("qh_params_from_theorem: (p, r) outside the admissible domain");
  }
  const double m = p / r;
  const double sigma = a / (r - a);
  const double alpha = coeffs.derivative(m) / std::sqrt(coeffs(m) * (r - a));
  QHParams params;
  params.alpha = alpha;
  params.beta = alpha;
  params.sigma = sigma;
  params.tau = sigma;
  params.gamma = 1.0 + 2.0 * std::sqrt(params.sigma * params.tau);
  return params;
}

double f_coefficient(const QHParams& params, double s, double t, double u) {
  if (!(0.0 < s && s < t && t < u)) {
    throw ArgumentError("f_coefficient: requires 0 < s < t < u");
  }
  const double denom = u * (1.0 + s * params.sigma) + params.tau - s * params.gamma;
  if (!(denom > 0.0)) {
    throw ArgumentError("f_coefficient: nonpositive denominator");
  }
  return (u - t) * (t - s) / denom;
}

MomentCheckReport make_moment_check(std::string name, double estimate,
                                    double theory, double std_error, long n,
                                    double z_max) {
  MomentCheckReport report;
  report.name = std::move(name);
  report.estimate = estimate;
  report.theory = theory;
  report.std_error = std_error;
  report.z_score = (std_error > 0.0) ? (estimate - theory) / std_error
                                     : (estimate == theory ? 0.0 : 1e300);
  report.n = n;
  report.pass = std::abs(report.z_score) <= z_max;
  return report;
}

RegressionReport linear_regression_report(const Eigen::VectorXd& y,
                                          const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& theory,
                                          std::string name, double z_max,
                                          bool allow_drop) {
  const long n = X.rows();
  const int k = static_cast<int>(X.cols());
  if (y.size() != n || theory.size() != k) {
    throw ArgumentError("linear_regression_report: dimension mismatch");
  }

  Eigen::MatrixXd xtx = X.transpose() * X;
  std::vector<int> keep(k);
  for (int j = 0; j < k; ++j) keep[j] = j;
  std::vector<int> dropped;

  // Drop columns (or fail) while the normal-equation matrix is singular.
  for (;;) {
    Eigen::MatrixXd sub(keep.size(), keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
      for (std::size_t j = 0; j < keep.size(); ++j)
        sub(i, j) = xtx(keep[i], keep[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigensolver(sub);
    const double max_ev = eigensolver.eigenvalues().maxCoeff();
    const double min_ev = eigensolver.eigenvalues().minCoeff();
    if (min_ev > max_ev * 1e-12 && min_ev > 0.0) break;
    if (!allow_drop || keep.size() <= 1) {
      throw SingularDesignError("regression '" + name + "': singular design");
    }
    // Remove the column with the largest weight in the null eigenvector.
    Eigen::VectorXd null_vec = eigensolver.eigenvectors().col(0);
    int worst = 0;
    for (int j = 1; j < null_vec.size(); ++j) {
      if (std::abs(null_vec[j]) > std::abs(null_vec[worst])) worst = j;
    }
    dropped.push_back(keep[static_cast<std::size_t>(worst)]);
    keep.erase(keep.begin() + worst);
  }

  const int kk = static_cast<int>(keep.size());
  Eigen::MatrixXd Xk(n, kk);
  for (int j = 0; j < kk; ++j) Xk.col(j) = X.col(keep[j]);
  Eigen::MatrixXd xtx_k = Xk.transpose() * Xk;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx_k);
  Eigen::VectorXd beta_k = ldlt.solve(Xk.transpose() * y);
  Eigen::VectorXd resid = y - Xk * beta_k;

  // HC0 sandwich covariance.
  Eigen::ArrayXd e2 = resid.array().square();
  Eigen::MatrixXd meat = Xk.transpose() * (Xk.array().colwise() * e2).matrix();
  Eigen::MatrixXd bread = ldlt.solve(Eigen::MatrixXd::Identity(kk, kk));
  Eigen::MatrixXd cov_k = bread * meat * bread;

  RegressionReport report;
  report.name = std::move(name);
  report.n = n;
  report.coefficients = Eigen::VectorXd::Zero(k);
  report.theory_coefficients = theory;
  report.covariance_of_estimates = Eigen::MatrixXd::Zero(k, k);
  report.z_scores = Eigen::VectorXd::Zero(k);
  report.dropped_features = dropped;
  report.pass = true;
  for (int j = 0; j < kk; ++j) {
    const int col = keep[j];
    report.coefficients[col] = beta_k[j];
    for (int i = 0; i < kk; ++i) {
      report.covariance_of_estimates(keep[i], col) = cov_k(i, j);
    }
    const double se = std::sqrt(std::max(0.0, cov_k(j, j)));
    const double z = (se > 0.0) ? (beta_k[j] - theory[col]) / se
                                : (beta_k[j] == theory[col] ? 0.0 : 1e300);
    report.z_scores[col] = z;
    report.pass = report.pass && std::abs(z) <= z_max;
  }
  return report;
}

std::vector<MomentCheckReport> covariance_check(
    const PathBatch& batch, const std::vector<std::pair<double, double>>& pairs,
    double z_max) {
  std::vector<MomentCheckReport> reports;
  const long n = batch.n_paths();
  for (const auto& [s, u] : pairs) {
    const Eigen::VectorXd zs = batch.values.col(batch.grid.index_of(s));
    const Eigen::VectorXd zu = batch.values.col(batch.grid.index_of(u));
    const double ms = zs.mean();
    const double mu = zu.mean();
    const Eigen::ArrayXd ds = zs.array() - ms;
    const Eigen::ArrayXd du = zu.array() - mu;
    const double cov = (ds * du).sum() / static_cast<double>(n - 1);
    const double m22 = (ds.square() * du.square()).mean();
    const double se = std::sqrt(std::max(0.0, m22 - cov * cov) / static_cast<double>(n));
    reports.push_back(make_moment_check(
        "cov(" + std::to_string(s) + "," + std::to_string(u) + ")", cov,
        std::min(s, u), se, n, z_max));
  }
  return reports;
}

RegressionReport harness_regression(const PathBatch& batch, double s, double t,
                                    double u, double z_max) {
  if (!(s < t && t < u)) throw ArgumentError("harness_regression: requires s < t < u");
  const long n = batch.n_paths();
  Eigen::MatrixXd X(n, 3);
  X.col(0).setOnes();
  X.col(1) = batch.values.col(batch.grid.index_of(s));
  X.col(2) = batch.values.col(batch.grid.index_of(u));
  const Eigen::VectorXd y = batch.values.col(batch.grid.index_of(t));
  Eigen::VectorXd theory(3);
  theory << 0.0, (u - t) / (u - s), (t - s) / (u - s);
  return linear_regression_report(
      y, X, theory,
      "harness(" + std::to_string(s) + "," + std::to_string(t) + "," +
          std::to_string(u) + ")",
      z_max, /*allow_drop=*/false);
}

RegressionReport qvar_regression(const PathBatch& batch, double s, double t,
                                 double u, const QHParams& params, double z_max) {
  const double f = f_coefficient(params, s, t, u);
  const long n = batch.n_paths();
  const Eigen::VectorXd zs = batch.values.col(batch.grid.index_of(s));
  const Eigen::VectorXd zt = batch.values.col(batch.grid.index_of(t));
  const Eigen::VectorXd zu = batch.values.col(batch.grid.index_of(u));

  const Eigen::ArrayXd delta = (zu - zs).array() / (u - s);
  const Eigen::ArrayXd delta_tilde = (u * zs - s * zu).array() / (u - s);
  const Eigen::ArrayXd resid =
      zt.array() - ((u - t) * zs.array() + (t - s) * zu.array()) / (u - s);

  Eigen::MatrixXd X(n, 6);
  X.col(0).setOnes();
  X.col(1) = delta_tilde.matrix();
  X.col(2) = delta.matrix();
  X.col(3) = delta_tilde.square().matrix();
  X.col(4) = delta.square().matrix();
  X.col(5) = (delta_tilde * delta).matrix();
  const Eigen::VectorXd y = resid.square().matrix();

  Eigen::VectorXd theory(6);
  theory << f, f * params.alpha, f * params.beta, f * params.sigma,
      f * params.tau, -f * (1.0 - params.gamma);
  return linear_regression_report(
      y, X, theory,
      "qvar(" + std::to_string(s) + "," + std::to_string(t) + "," +
          std::to_string(u) + ")",
      z_max, /*allow_drop=*/true);
}

MomentCheckReport identity_amazing(const FamilySpec& family, double p, double r,
                                   double s, int n_paths, std::uint64_t seed,
                                   double z_max) {
  if (!(s > 0.0)) throw ArgumentError("identity_amazing: requires s > 0");
  const RandomizationLaw law = make_randomization_law(family, p, r);
  const KPrimeMoments moments = kprime_moments(law);
  std::vector<double> draws(n_paths);
  for (int i = 0; i < n_paths; ++i) {
    RandomStream rng(seed, static_cast<std::uint64_t>(i));
    const double theta = sample_theta(law, rng);
    draws[i] = s * cumulants(family, theta).kappa_double_prime;
  }
  const double mean = sample_mean(draws);
  const double se = std::sqrt(sample_variance(draws) / n_paths);
  return make_moment_check("amazing_mc", mean, s * r * moments.variance, se,
                           n_paths, z_max);
}

MomentCheckReport identity_amazing_quadrature(const FamilySpec& family, double p,
                                              double r, double rel_tol) {
  const RandomizationLaw law = make_randomization_law(family, p, r);
  const KPrimeMoments moments = kprime_moments(law);
  const ThetaDomain dom = theta_domain(family);
  const double lhs =
      integrate(
          [&law, &family](double theta) {
            const CumulantValues c = cumulants(family, theta);
            const double exponent = law.log_c + law.p * theta - law.r * c.kappa;
            if (exponent < -745.0) return 0.0;
            return c.kappa_double_prime * std::exp(exponent);
          },
          dom.lo, dom.hi, 1e-11)
          .value;
  const double rhs = r * moments.variance;
  return make_moment_check("amazing_quadrature", lhs, rhs,
                           std::abs(rhs) * rel_tol / 4.0, 0);
}

MomentCheckReport identity_minivv(const FamilySpec& family, double theta,
                                  double t, double u, int n_paths,
                                  std::uint64_t seed, int n_max, double tol,
                                  double z_max) {
  if (!(0.0 < t && t < u)) throw ArgumentError("identity_minivv: requires 0 < t < u");
  const VarianceCoeffs coeffs = variance_coeffs(family);
  const double factor = t * (u - t) / (u + coeffs.a);

  if (is_discrete(family)) {
    double max_dev = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      double mass = 0.0, m1 = 0.0, m2 = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double w = increment_density(family, theta, t, k) *
                         increment_density(family, theta, u - t, n - k);
        mass += w;
        m1 += k * w;
        m2 += static_cast<double>(k) * k * w;
      }
      if (mass <= 0.0) continue;
      const double mean = m1 / mass;
      const double var = m2 / mass - mean * mean;
      const double formula = factor * coeffs(n / u);
      max_dev = std::max(max_dev,
                         std::abs(var - formula) / std::max(1.0, std::abs(formula)));
    }
    return make_moment_check("minivv_enumeration", max_dev, 0.0, tol / z_max,
                             n_max + 1, z_max);
  }

  // Continuous families: Monte Carlo binned on xi_u.  With the exact
  // conditional mean (t/u) xi_u, d = e^2 - factor V(xi_u/u) has mean zero
  // both overall and within every xi_u bin.
  std::vector<double> xu(n_paths), d(n_paths);
  for (int i = 0; i < n_paths; ++i) {
    RandomStream rng(seed, static_cast<std::uint64_t>(i));
    const double x1 = increment_sample(family, theta, t, rng);
    const double x2 = increment_sample(family, theta, u - t, rng);
    const double total = x1 + x2;
    const double e = x1 - (t / u) * total;
    xu[i] = total;
    d[i] = e * e - factor * coeffs(total / u);
  }
  const double pooled_mean = sample_mean(d);
  const double pooled_se = std::sqrt(sample_variance(d) / n_paths);
  MomentCheckReport report =
      make_moment_check("minivv_mc", pooled_mean, 0.0, pooled_se, n_paths, z_max);

  // Decile bins on xi_u.
  std::vector<int> order(n_paths);
  for (int i = 0; i < n_paths; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&xu](int a, int b) { return xu[a] < xu[b]; });
  const int bins = 10;
  for (int b = 0; b < bins; ++b) {
    const int lo = static_cast<int>(static_cast<long>(n_paths) * b / bins);
    const int hi = static_cast<int>(static_cast<long>(n_paths) * (b + 1) / bins);
    if (hi - lo < 2) continue;
    std::vector<double> db;
    db.reserve(hi - lo);
    for (int i = lo; i < hi; ++i) db.push_back(d[order[i]]);
    const double bm = sample_mean(db);
    const double bse = std::sqrt(sample_variance(db) / db.size());
    if (bse > 0.0 && std::abs(bm / bse) > z_max) report.pass = false;
  }
  return report;
}

RegressionReport martingale_check(const PathBatch& batch_y, double s, double t,
                                  double p, double r, double z_max) {
  if (!(s < t)) throw ArgumentError("martingale_check: requires s < t");
  const long n = batch_y.n_paths();
  const Eigen::VectorXd ys = batch_y.values.col(batch_y.grid.index_of(s));
  const Eigen::VectorXd yt = batch_y.values.col(batch_y.grid.index_of(t));
  Eigen::MatrixXd X(n, 2);
  X.col(0).setOnes();
  X.col(1) = ys;
  Eigen::VectorXd theory(2);
  theory << (t - s) * p / (s + r), (t - s) / (s + r);
  return linear_regression_report(yt - ys, X, theory,
                                  "martingale(" + std::to_string(s) + "," +
                                      std::to_string(t) + ")",
                                  z_max, false);
}

Eigen::VectorXd kprime_of_thetas(const PathBatch& batch) {
  Eigen::VectorXd out(batch.thetas.size());
  for (Eigen::Index i = 0; i < batch.thetas.size(); ++i) {
    out[i] = cumulants(batch.family, batch.thetas[i]).kappa_prime;
  }
  return out;
}

RegressionReport theta_mean_given_y_check(const PathBatch& batch_y, double s,
                                          double p, double r, double z_max) {
  const long n = batch_y.n_paths();
  Eigen::MatrixXd X(n, 2);
  X.col(0).setOnes();
  X.col(1) = batch_y.values.col(batch_y.grid.index_of(s));
  Eigen::VectorXd theory(2);
  theory << p / (s + r), 1.0 / (s + r);
  return linear_regression_report(kprime_of_thetas(batch_y), X, theory,
                                  "theta_mean(" + std::to_string(s) + ")", z_max,
                                  false);
}

RegressionReport theta_posterior_check(const PathBatch& batch_z, double s,
                                       double u, double p, double r,
                                       double z_max) {
  if (batch_z.tag != ProcessTag::Z) {
    throw ArgumentError("theta_posterior_check: requires a stitched batch");
  }
  if (!(s < 1.0 && u > 1.0)) {
    throw ArgumentError("theta_posterior_check: requires s < 1 < u");
  }
  const double s_mapped = time_map(s, r, TimeMapSide::pre);
  const double u_mapped = time_map(u, r, TimeMapSide::post);
  auto locate = [](const std::vector<double>& times, double value) {
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (std::abs(times[k] - value) <= 1e-12 * std::max(1.0, std::abs(value))) {
        return k;
      }
    }
    throw GridError("mapped time not retained in the batch");
  };
  const std::size_t ks = locate(batch_z.pre_mapped_times, s_mapped);
  const std::size_t ku = locate(batch_z.post_mapped_times, u_mapped);

  const long n = batch_z.n_paths();
  Eigen::MatrixXd X(n, 3);
  X.col(0).setOnes();
  X.col(1) = batch_z.y_pre.col(ks);
  X.col(2) = batch_z.y_post.col(ku);
  const double denom = s_mapped + u_mapped + r;
  Eigen::VectorXd theory(3);
  theory << p / denom, 1.0 / denom, 1.0 / denom;
  return linear_regression_report(kprime_of_thetas(batch_z), X, theory,
                                  "theta_posterior(" + std::to_string(s) + "," +
                                      std::to_string(u) + ")",
                                  z_max, false);
}

}  // namespace bimeixner
