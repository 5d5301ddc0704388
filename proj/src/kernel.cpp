#include "bimeixner/kernel.hpp"

#include <cmath>

#include "bimeixner/errors.hpp"
#include "bimeixner/stats.hpp"

namespace bimeixner {

KernelContext make_kernel_context(RandomizationLaw law, double tolerance) {
  if (!(tolerance > 0.0 && tolerance <= 1e-4)) {
    throw ArgumentError("kernel tolerance must lie in (0, 1e-4]");
  }
  return {std::move(law), tolerance};
}

namespace {

double log_h_quadrature(const KernelContext& ctx, double t, double x) {
  const RandomizationLaw& law = ctx.law;
  const double total_p = law.p + x;
  const double total_r = law.r + t;

  // Shift by the interior maximum of the exponent; for the families with
  // kappa' > 0 a nonpositive target mean means the integral diverges.
  double shift = 0.0;
  if (law.family.kind == FamilyKind::HyperbolicSecant ||
      law.family.kind == FamilyKind::Wiener || total_p > 0.0) {
    const double mode = kprime_inverse(law.family, total_p / total_r);
    shift = total_p * mode - total_r * cumulants(law.family, mode).kappa;
  } else {
    throw IntegrationError("h_function: integral diverges for x + p <= 0");
  }

  const ThetaDomain dom = theta_domain(law.family);
  const double rel_tol = std::max(1e-14, std::min(ctx.tolerance, 1e-4));
  const QuadratureResult integral = integrate(
      [&law, total_p, total_r, shift](double theta) {
        const CumulantValues c = cumulants(law.family, theta);
        const double expo = total_p * theta - total_r * c.kappa - shift;
        return expo < -745.0 ? 0.0 : std::exp(expo);
      },
      dom.lo, dom.hi, rel_tol);
  return law.log_c + shift + std::log(integral.value);
}

}  // namespace

double log_h_function(const KernelContext& ctx, double t, double x) {
  if (!(t >= 0.0)) throw ArgumentError("h_function: requires t >= 0");
  const RandomizationLaw& law = ctx.law;
  const double p = law.p, r = law.r;
  switch (law.family.kind) {
    case FamilyKind::Wiener: {
      const double a = x + p;
      return 0.5 * std::log(r / (t + r)) + a * a / (2.0 * (t + r)) -
             p * p / (2.0 * r);
    }
    case FamilyKind::Poisson: {
      if (!(p + x > 0.0)) {
        throw IntegrationError("h_function: integral diverges for x + p <= 0");
      }
      return t + p * std::log(r) - ln_gamma(p) + ln_gamma(p + x) -
             (p + x) * std::log(r + t);
    }
    default:
      return log_h_quadrature(ctx, t, x);
  }
}

double h_function(const KernelContext& ctx, double t, double x) {
  return std::exp(log_h_function(ctx, t, x));
}

double forward_transition_density(const KernelContext& ctx, double s, double x,
                                  double t, double y) {
  if (!(s >= 0.0 && s < t)) {
    throw ArgumentError("forward_transition_density: requires 0 <= s < t");
  }
  const double log_increment =
      increment_log_density(ctx.law.family, 0.0, t - s, y - x);
  if (std::isinf(log_increment)) return 0.0;
  return std::exp(log_h_function(ctx, t, y) - log_h_function(ctx, s, x) +
                  log_increment);
}

double reversed_transition_density(const KernelContext& ctx, double t, double y,
                                   double s, double x, bool* out_of_support) {
  if (!(s > 0.0 && s < t)) {
    throw ArgumentError("reversed_transition_density: requires 0 < s < t");
  }
  if (out_of_support != nullptr) *out_of_support = false;
  const FamilySpec& family = ctx.law.family;
  const double denom = increment_density(family, 0.0, t, y);
  if (denom < 1e-300) {
    if (out_of_support != nullptr) *out_of_support = true;
    return 0.0;
  }
  return increment_density(family, 0.0, s, x) *
         increment_density(family, 0.0, t - s, y - x) / denom;
}

}  // namespace bimeixner
