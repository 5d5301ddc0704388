#pragma once

#include <string>

#include "bimeixner/rng.hpp"

namespace bimeixner {

// The five Levy processes whose natural exponential families have quadratic
// variance functions V(m) = a m^2 + b m + c.
enum class FamilyKind {
  Wiener,
  Poisson,
  Gamma,
  NegativeBinomial,
  HyperbolicSecant,
};

struct FamilySpec {
  FamilyKind kind;
  double q = 0.0;  // success parameter, NegativeBinomial only

  static FamilySpec wiener() { return {FamilyKind::Wiener}; }
  static FamilySpec poisson() { return {FamilyKind::Poisson}; }
  static FamilySpec gamma() { return {FamilyKind::Gamma}; }
  static FamilySpec negative_binomial(double q);
  static FamilySpec hyperbolic_secant() { return {FamilyKind::HyperbolicSecant}; }
};

// Parse "wiener" / "poisson" / "gamma" / "negative-binomial" / "secant".
FamilySpec parse_family(const std::string& name, double q);
std::string family_name(const FamilySpec& family);

struct CumulantValues {
  double kappa;
  double kappa_prime;
  double kappa_double_prime;
};

// Coefficients of the quadratic variance function V(m) = a m^2 + b m + c.
struct VarianceCoeffs {
  double a;
  double b;
  double c;

  double operator()(double m) const { return (a * m + b) * m + c; }
  double derivative(double m) const { return 2.0 * a * m + b; }
};

struct ThetaDomain {
  double lo;
  double hi;

  bool contains(double theta) const { return theta > lo && theta < hi; }
};

// Open interval (theta0, theta1) on which the cumulant function is finite.
ThetaDomain theta_domain(const FamilySpec& family);

VarianceCoeffs variance_coeffs(const FamilySpec& family);

// kappa, kappa', kappa'' at an interior point of the domain.
// Throws DomainError for theta on or outside the boundary.
CumulantValues cumulants(const FamilySpec& family, double theta);

// Inverse of kappa' (the mean parametrization m -> theta).
double kprime_inverse(const FamilySpec& family, double m);

// One draw from the law of the tilted increment X_t^(theta).
double increment_sample(const FamilySpec& family, double theta, double t,
                        RandomStream& rng);

// Density (continuous families) or mass (discrete families) of X_t^(theta)
// at x.  Discrete families return 0 for non-integer or negative x.
double increment_density(const FamilySpec& family, double theta, double t,
                         double x);

// log of increment_density; -inf off the support.
double increment_log_density(const FamilySpec& family, double theta, double t,
                             double x);

inline bool is_discrete(const FamilySpec& family) {
  return family.kind == FamilyKind::Poisson ||
         family.kind == FamilyKind::NegativeBinomial;
}

}  // namespace bimeixner
