#pragma once

#include <functional>
#include <vector>

namespace bimeixner {

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

// Globally adaptive Gauss(7)/Kronrod(15) integration of f over (a,b).
// Infinite endpoints are admitted and handled by algebraic substitutions
// u/(1-u) (one-sided) and u/(1-u^2) (two-sided).  rel_tol must lie in
// [1e-14, 1e-4].  Throws IntegrationError when the subdivision budget is
// exhausted before the error estimate reaches rel_tol*max(1,|value|).
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double rel_tol);

// Like integrate(), but returns the non-converged result instead of throwing.
QuadratureResult integrate_nothrow(const std::function<double(double)>& f,
                                   double a, double b, double rel_tol);

// log Gamma(z) for complex z = re + i*im with re > 0 (Lanczos, g = 671/128,
// 14-term coefficient set).  Returns the principal branch.
void log_gamma_complex(double re, double im, double& out_re, double& out_im);

// |Gamma(t + ix)|^2 for t > 0.  Relative error below 1e-10 for
// t in [0.05, 50], |x| <= 50.
double abs_gamma_sq(double t, double x);

// Monotone inverse-CDF interpolant of a probability density on (a,b).
// Nodes are placed by adaptive bisection until the cumulative Hermite
// interpolant reproduces the cell integrals to tol; sample() inverts the
// cubic within the bracketing cell.
class InverseCdfTable {
 public:
  // u in (0,1) -> x with CDF(x) = u, accurate to the construction tol.
  double sample(double u) const;
  // CDF of the tabulated (normalized) density; exposed for validation.
  double cdf(double x) const;

  double support_lo() const { return x_.front(); }
  double support_hi() const { return x_.back(); }
  double total_mass() const { return total_mass_; }
  std::size_t node_count() const { return x_.size(); }

 private:
  friend InverseCdfTable tabulate_inverse_cdf(
      const std::function<double(double)>& density, double a, double b,
      double tol);

  std::vector<double> x_;    // ascending nodes
  std::vector<double> cdf_;  // cdf_[0]=0, cdf_.back()=1
  std::vector<double> pdf_;  // normalized density at nodes
  double total_mass_ = 0.0;  // mass of the raw density before normalization
};

// Tabulates the inverse CDF of `density` on (a,b).  The density must be
// nonnegative and integrate to 1 within tol over (a,b); otherwise a
// TabulationError is thrown.
InverseCdfTable tabulate_inverse_cdf(const std::function<double(double)>& density,
                                     double a, double b, double tol);

}  // namespace bimeixner
