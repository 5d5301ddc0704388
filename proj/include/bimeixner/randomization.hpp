#pragma once

#include <memory>
#include <vector>

#include "bimeixner/family.hpp"
#include "bimeixner/quadrature.hpp"
#include "bimeixner/rng.hpp"

namespace bimeixner {

// Randomization law h(dtheta) = C e^{p theta - r kappa(theta)} dtheta on the
// open domain (theta0, theta1).  Admissibility follows the per-family domain
// (Wiener r>0; Poisson r>0, p>0; Gamma r>1, p>0; NegativeBinomial r>1, p>0;
// HyperbolicSecant r>1/2); boundary values are rejected.
struct RandomizationLaw {
  FamilySpec family;
  double p;
  double r;
  double log_c;  // log normalizing constant

  // HyperbolicSecant only: cached inverse CDF of h on (-pi, pi).
  std::shared_ptr<const InverseCdfTable> theta_table;
};

RandomizationLaw make_randomization_law(const FamilySpec& family, double p,
                                        double r);

// log C for the admissible (family, p, r); closed form except for the
// hyperbolic secant family, which is integrated numerically.
double normalizing_constant(const FamilySpec& family, double p, double r);

// One draw of Theta from h(dtheta); always strictly inside (theta0, theta1).
double sample_theta(const RandomizationLaw& law, RandomStream& rng);

// log h(theta); -inf outside the open domain.
double theta_log_density(const RandomizationLaw& law, double theta);

struct KPrimeMoments {
  double mean;      // = p/r
  double variance;  // family-specific closed form
};

// Mean and variance of kappa'(Theta) under h.
KPrimeMoments kprime_moments(const RandomizationLaw& law);

// Same moments by adaptive quadrature against h; used as a cross-check.
KPrimeMoments kprime_moments_by_quadrature(const RandomizationLaw& law,
                                           double rel_tol = 1e-11);

// Numeric check of the boundary-decay assumptions behind the martingale
// property: for each probe x, e^{(p+x)theta - r kappa(theta)} and
// kappa'(theta) e^{(p+x)theta - r kappa(theta)} must decrease below the
// threshold along geometric grids approaching each endpoint.  This is a
// limit heuristic, not a proof.
struct AssumptionEndpointStatus {
  double x;
  bool upper_endpoint;
  bool decay_pass;          // plain exponential factor
  bool weighted_decay_pass; // kappa'-weighted factor
  double final_log_decay;
  double final_log_weighted;
};

struct AssumptionReport {
  std::vector<AssumptionEndpointStatus> entries;
  bool pass = false;
  double threshold = 1e-12;
  int grid_points = 40;
};

// Probe points default to {0, mean, mean + 3 sd} of the base law g(dx),
// projected onto its support.
std::vector<double> default_support_points(const FamilySpec& family);

AssumptionReport check_assumptions(const FamilySpec& family, double p, double r,
                                   const std::vector<double>& support_points,
                                   double threshold = 1e-12,
                                   int grid_points = 40);

}  // namespace bimeixner
