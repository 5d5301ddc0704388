#include "bimeixner/randomization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bimeixner/errors.hpp"
#include "bimeixner/stats.hpp"

namespace bimeixner {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

void require_admissible(const FamilySpec& family, double p, double r) {
  bool ok = false;
  switch (family.kind) {
    case FamilyKind::Wiener: ok = r > 0.0; break;
    case FamilyKind::Poisson: ok = r > 0.0 && p > 0.0; break;
    case FamilyKind::Gamma: ok = r > 1.0 && p > 0.0; break;
    case FamilyKind::NegativeBinomial: ok = r > 1.0 && p > 0.0; break;
    case FamilyKind::HyperbolicSecant: ok = r > 0.5; break;
  }
  if (!ok) {
    throw ArgumentError("(p, r) = (" + std::to_string(p) + ", " +
                        std::to_string(r) + ") not admissible for " +
                        family_name(family));
  }
}

double secant_log_weight(double p, double r, double theta) {
  return p * theta + 2.0 * r * std::log(std::cos(0.5 * theta));
}

// log |kappa'(theta)| without overflow near the domain endpoints.
double log_abs_kprime(const FamilySpec& family, double theta) {
  switch (family.kind) {
    case FamilyKind::Wiener:
      return std::log(std::abs(theta));
    case FamilyKind::Poisson:
      return theta;
    case FamilyKind::Gamma:
      return -std::log(1.0 - theta);
    case FamilyKind::NegativeBinomial: {
      const double gap = -std::log(family.q) - theta;  // > 0 inside the domain
      return -gap - std::log(-std::expm1(-gap));
    }
    case FamilyKind::HyperbolicSecant:
      return std::log(std::abs(std::tan(0.5 * theta)));
  }
  throw ArgumentError("unreachable family kind");
}

}  // namespace

double normalizing_constant(const FamilySpec& family, double p, double r) {
  require_admissible(family, p, r);
  switch (family.kind) {
    case FamilyKind::Wiener:
      return 0.5 * std::log(r / (2.0 * kPi)) - p * p / (2.0 * r);
    case FamilyKind::Poisson:
      return -r + p * std::log(r) - ln_gamma(p);
    case FamilyKind::Gamma:
      return (r + 1.0) * std::log(p) - p - ln_gamma(r + 1.0);
    case FamilyKind::NegativeBinomial: {
      const double log_beta =
          ln_gamma(p) + ln_gamma(r + 1.0) - ln_gamma(p + r + 1.0);
      return r * std::log1p(-family.q) + p * std::log(family.q) - log_beta;
    }
    case FamilyKind::HyperbolicSecant: {
      // Shift by the mode value so the integrand stays in range.
      const double mode = 2.0 * std::atan(p / r);
      const double shift = secant_log_weight(p, r, mode);
      const QuadratureResult integral = integrate(
          [p, r, shift](double theta) {
            return std::exp(secant_log_weight(p, r, theta) - shift);
          },
          -kPi, kPi, 1e-11);
      return -(shift + std::log(integral.value));
    }
  }
  throw ArgumentError("unreachable family kind");
}

RandomizationLaw make_randomization_law(const FamilySpec& family, double p,
                                        double r) {
  require_admissible(family, p, r);
  RandomizationLaw law{family, p, r, normalizing_constant(family, p, r), nullptr};
  if (family.kind == FamilyKind::HyperbolicSecant) {
    // Truncate where each edge holds < ~1e-14 of the mass; the density decays
    // like (pi - |theta|)^{2r} there.
    const double c = std::exp(law.log_c);
    auto edge_delta = [&](double sign) {
      const double amp = c * std::exp(std::abs(p) * kPi);
      double delta = std::pow(1e-14 * std::pow(2.0, 2.0 * r) * (2.0 * r + 1.0) /
                                  amp,
                              1.0 / (2.0 * r + 1.0));
      (void)sign;
      return std::clamp(delta, 1e-12, 1e-4);
    };
    const double lo = -kPi + edge_delta(-1.0);
    const double hi = kPi - edge_delta(+1.0);
    const double log_c = law.log_c;
    law.theta_table = std::make_shared<const InverseCdfTable>(tabulate_inverse_cdf(
        [p, r, log_c](double theta) {
          return std::exp(log_c + secant_log_weight(p, r, theta));
        },
        lo, hi, 1e-12));
  }
  return law;
}

double sample_theta(const RandomizationLaw& law, RandomStream& rng) {
  switch (law.family.kind) {
    case FamilyKind::Wiener:
      return law.p / law.r + rng.next_normal() / std::sqrt(law.r);
    case FamilyKind::Poisson:
      // kappa'(Theta) = e^Theta has the Gamma(p, r) law
      return std::log(rng.next_gamma(law.p, law.r));
    case FamilyKind::Gamma:
      // 1 - Theta has the Gamma(r+1, p) law
      return 1.0 - rng.next_gamma(law.r + 1.0, law.p);
    case FamilyKind::NegativeBinomial:
      // q e^Theta has the Beta(p, r+1) law
      return std::log(rng.next_beta(law.p, law.r + 1.0) / law.family.q);
    case FamilyKind::HyperbolicSecant:
      return law.theta_table->sample(rng.next_uniform());
  }
  throw ArgumentError("unreachable family kind");
}

double theta_log_density(const RandomizationLaw& law, double theta) {
  if (!theta_domain(law.family).contains(theta)) {
    return -std::numeric_limits<double>::infinity();
  }
  const CumulantValues c = cumulants(law.family, theta);
  return law.log_c + law.p * theta - law.r * c.kappa;
}

KPrimeMoments kprime_moments(const RandomizationLaw& law) {
  const double p = law.p, r = law.r;
  switch (law.family.kind) {
    case FamilyKind::Wiener:
      return {p / r, 1.0 / r};
    case FamilyKind::Poisson:
      return {p / r, p / (r * r)};
    case FamilyKind::Gamma:
      if (!(r > 1.0)) throw ArgumentError("gamma variance requires r > 1");
      return {p / r, p * p / (r * r * (r - 1.0))};
    case FamilyKind::NegativeBinomial:
      if (!(r > 1.0)) throw ArgumentError("negative binomial variance requires r > 1");
      return {p / r, p * (p + r) / (r * r * (r - 1.0))};
    case FamilyKind::HyperbolicSecant:
      if (!(r > 0.5)) throw ArgumentError("secant variance requires r > 1/2");
      return {p / r, (p * p + r * r) / (r * r * (2.0 * r - 1.0))};
  }
  throw ArgumentError("unreachable family kind");
}

KPrimeMoments kprime_moments_by_quadrature(const RandomizationLaw& law,
                                           double rel_tol) {
  const ThetaDomain dom = theta_domain(law.family);
  auto weighted = [&law](double theta, int power) {
    const CumulantValues c = cumulants(law.family, theta);
    const double exponent = law.log_c + law.p * theta - law.r * c.kappa;
    if (exponent < -745.0) return 0.0;  // weight underflows; avoid 0 * inf
    double value = std::exp(exponent);
    for (int i = 0; i < power; ++i) value *= c.kappa_prime;
    return value;
  };
  const double m1 =
      integrate([&](double th) { return weighted(th, 1); }, dom.lo, dom.hi, rel_tol)
          .value;
  const double m2 =
      integrate([&](double th) { return weighted(th, 2); }, dom.lo, dom.hi, rel_tol)
          .value;
  return {m1, m2 - m1 * m1};
}

std::vector<double> default_support_points(const FamilySpec& family) {
  const CumulantValues base = cumulants(family, 0.0);
  const double mean = base.kappa_prime;
  const double sd = std::sqrt(base.kappa_double_prime);
  std::vector<double> points{0.0, mean, mean + 3.0 * sd};
  if (is_discrete(family)) {
    for (double& x : points) x = std::max(0.0, std::round(x));
  } else if (family.kind == FamilyKind::Gamma) {
    points[0] = 0.0;  // boundary of support is a legitimate probe
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

AssumptionReport check_assumptions(const FamilySpec& family, double p, double r,
                                   const std::vector<double>& support_points,
                                   double threshold, int grid_points) {
  if (!(r > 0.0)) throw ArgumentError("check_assumptions: r must be > 0");
  const ThetaDomain dom = theta_domain(family);
  AssumptionReport report;
  report.threshold = threshold;
  report.grid_points = grid_points;
  report.pass = true;
  const double log_threshold = std::log(threshold);

  auto grid_toward = [&](bool upper) {
    std::vector<double> grid(grid_points);
    const double endpoint = upper ? dom.hi : dom.lo;
    if (std::isinf(endpoint)) {
      double mag = 0.5;
      for (int k = 0; k < grid_points; ++k) {
        grid[k] = upper ? mag : -mag;
        mag *= 1.5;
      }
    } else {
      double gap = std::abs(endpoint) + 1.0;
      for (int k = 0; k < grid_points; ++k) {
        gap = std::max(0.5 * gap, 1e-14);
        grid[k] = endpoint - (upper ? gap : -gap);
      }
    }
    return grid;
  };

  for (double x : support_points) {
    for (bool upper : {false, true}) {
      const std::vector<double> grid = grid_toward(upper);
      std::vector<double> log_decay(grid.size()), log_weighted(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const CumulantValues c = cumulants(family, grid[k]);
        const double exponent = (p + x) * grid[k] - r * c.kappa;
        log_decay[k] = exponent;
        log_weighted[k] = log_abs_kprime(family, grid[k]) + exponent;
      }
      // Algebraic decay near a finite endpoint cannot numerically reach the
      // threshold before the grid hits machine resolution, so a strictly
      // decreasing tail with a steady per-step decrement also certifies
      // convergence to zero.
      auto tail_ok = [&](const std::vector<double>& seq) {
        const std::size_t start = seq.size() / 2;
        for (std::size_t k = start; k + 1 < seq.size(); ++k) {
          if (seq[k + 1] > seq[k] + 1e-9) return false;
        }
        if (seq.back() <= log_threshold) return true;
        const double steps = static_cast<double>(seq.size() - 1 - start);
        const double avg_decrement = (seq.back() - seq[start]) / steps;
        return avg_decrement <= -1e-3;
      };
      AssumptionEndpointStatus status;
      status.x = x;
      status.upper_endpoint = upper;
      status.decay_pass = tail_ok(log_decay);
      status.weighted_decay_pass = tail_ok(log_weighted);
      status.final_log_decay = log_decay.back();
      status.final_log_weighted = log_weighted.back();
      report.pass = report.pass && status.decay_pass && status.weighted_decay_pass;
      report.entries.push_back(status);
    }
  }
  return report;
}

}  // namespace bimeixner
