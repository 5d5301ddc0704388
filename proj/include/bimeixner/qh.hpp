#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bimeixner/process.hpp"

namespace bimeixner {

// Quadratic-harness parameters.  Construction enforces the bi-Meixner
// relations gamma = 1 + 2 sqrt(sigma tau) and alpha sqrt(tau) = beta
// sqrt(sigma) by building gamma from sigma and tau.
struct QHParams {
  double alpha;
  double beta;
  double sigma;
  double tau;
  double gamma;
};

// alpha = beta = V'(m)/sqrt(V(m)(r-a)), sigma = tau = a/(r-a), with m = p/r.
// Requires r > a and admissible (p, r).
QHParams qh_params_from_theorem(const FamilySpec& family, double p, double r);

// F_{t,s,u} = (u-t)(t-s) / (u(1+s sigma) + tau - s gamma) for 0 < s < t < u.
double f_coefficient(const QHParams& params, double s, double t, double u);

struct MomentCheckReport {
  std::string name;
  double estimate = 0.0;
  double theory = 0.0;
  double std_error = 0.0;  // exact checks encode tolerance/4 here
  double z_score = 0.0;
  long n = 0;
  bool pass = false;
};

MomentCheckReport make_moment_check(std::string name, double estimate,
                                    double theory, double std_error, long n,
                                    double z_max = 4.0);

struct RegressionReport {
  std::string name;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd theory_coefficients;
  Eigen::MatrixXd covariance_of_estimates;  // heteroskedasticity-robust
  Eigen::VectorXd z_scores;
  std::vector<int> dropped_features;
  long n = 0;
  bool pass = false;
};

// Ordinary least squares of y on the columns of X with sandwich standard
// errors, tested coefficient-wise against `theory`.  When the design is
// numerically singular: with allow_drop the offending columns are removed
// (and recorded), otherwise SingularDesignError is thrown.
RegressionReport linear_regression_report(const Eigen::VectorXd& y,
                                          const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& theory,
                                          std::string name, double z_max = 4.0,
                                          bool allow_drop = false);

// Sample covariance of (Z_s, Z_u) against min(s, u), with delta-method
// standard errors.
std::vector<MomentCheckReport> covariance_check(
    const PathBatch& batch, const std::vector<std::pair<double, double>>& pairs,
    double z_max = 4.0);

// E(Z_t | Z_s, Z_u) = (u-t)/(u-s) Z_s + (t-s)/(u-s) Z_u: regression of Z_t on
// (1, Z_s, Z_u) against intercept 0 and the interpolation slopes.
RegressionReport harness_regression(const PathBatch& batch, double s, double t,
                                    double u, double z_max = 4.0);

// Conditional-variance regression: with e = Z_t - [(u-t)Z_s + (t-s)Z_u]/(u-s)
// (the exact conditional mean), e^2 is regressed on
// (1, D~, D, D~^2, D^2, D~ D) where D = (Z_u-Z_s)/(u-s), D~ = (uZ_s-sZ_u)/(u-s);
// the theory vector is F_{t,s,u} (1, alpha, beta, sigma, tau, -(1-gamma)).
RegressionReport qvar_regression(const PathBatch& batch, double s, double t,
                                 double u, const QHParams& params,
                                 double z_max = 4.0);

// E(var(Y_s | Theta)) = s r var(kappa'(Theta)): Monte Carlo over Theta draws.
MomentCheckReport identity_amazing(const FamilySpec& family, double p, double r,
                                   double s, int n_paths, std::uint64_t seed,
                                   double z_max = 4.0);

// Quadrature leg of the same identity: int kappa'' dh = r var(kappa'(Theta))
// to 1e-8 relative.
MomentCheckReport identity_amazing_quadrature(const FamilySpec& family, double p,
                                              double r, double rel_tol = 1e-8);

// var(xi_t | xi_u) = t(u-t)/(u+a) V(xi_u/u) for the tilted process at `theta`:
// exact enumeration over xi_u = n <= n_max for the discrete families,
// Monte Carlo binned on xi_u for the continuous ones.
MomentCheckReport identity_minivv(const FamilySpec& family, double theta,
                                  double t, double u, int n_paths = 200000,
                                  std::uint64_t seed = 1, int n_max = 50,
                                  double tol = 1e-10, double z_max = 4.0);

// E(Y_t - Y_s | Y_s) = (t-s)(Y_s + p)/(s + r): regression of the increment
// on (1, Y_s).
RegressionReport martingale_check(const PathBatch& batch_y, double s, double t,
                                  double p, double r, double z_max = 4.0);

// E(kappa'(Theta) | Y_s) = (Y_s + p)/(s + r): regression of kappa'(Theta)
// on (1, Y_s).
RegressionReport theta_mean_given_y_check(const PathBatch& batch_y, double s,
                                          double p, double r, double z_max = 4.0);

// E(kappa'(Theta) | Y_{s'}, Y'_{u'}) = (Y_{s'} + Y'_{u'} + p)/(u' + s' + r)
// for s < 1 < u, using the ingredient paths retained by simulate_z.
RegressionReport theta_posterior_check(const PathBatch& batch_z, double s,
                                       double u, double p, double r,
                                       double z_max = 4.0);

// kappa'(theta_i) for every path of the batch.
Eigen::VectorXd kprime_of_thetas(const PathBatch& batch);

}  // namespace bimeixner
