#pragma once

#include "bimeixner/randomization.hpp"

namespace bimeixner {

// Evaluation context for the Doob-ratio transition machinery of the
// randomized process Y.
struct KernelContext {
  RandomizationLaw law;
  double tolerance = 1e-10;  // quadrature relative tolerance, in (0, 1e-4]
};

KernelContext make_kernel_context(RandomizationLaw law, double tolerance = 1e-10);

// H(t, x) = int e^{theta x - t kappa(theta)} h(dtheta) over the open domain.
// Closed forms for the Wiener (Gaussian integral) and Poisson (Gamma
// integral) families; adaptive quadrature with a mode shift otherwise.
// Throws IntegrationError when the integral diverges or fails to converge.
double h_function(const KernelContext& ctx, double t, double x);

// log H(t, x); H grows like e^{theta* x}, so ratios of H are formed in log
// space.
double log_h_function(const KernelContext& ctx, double t, double x);

// Forward transition density of Y: P_{s,t}(x, dy) = H(t,y)/H(s,x) g_{t-s}(y-x).
double forward_transition_density(const KernelContext& ctx, double s, double x,
                                  double t, double y);

// Reversed-time transition of Y, which coincides with the bridge of the
// untilted base process: g_s(x) g_{t-s}(y-x) / g_t(y).  Independent of (p, r).
// When the denominator underflows the value is 0 and *out_of_support is set.
double reversed_transition_density(const KernelContext& ctx, double t, double y,
                                   double s, double x,
                                   bool* out_of_support = nullptr);

}  // namespace bimeixner
