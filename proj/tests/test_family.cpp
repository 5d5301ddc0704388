#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "bimeixner/errors.hpp"
#include "bimeixner/family.hpp"
#include "bimeixner/quadrature.hpp"
#include "bimeixner/stats.hpp"

using namespace bimeixner;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
const double kInf = std::numeric_limits<double>::infinity();

std::vector<FamilySpec> all_families() {
  return {FamilySpec::wiener(), FamilySpec::poisson(), FamilySpec::gamma(),
          FamilySpec::negative_binomial(0.5), FamilySpec::hyperbolic_secant()};
}

// interior theta grid clipped to a finite window
std::vector<double> theta_grid(const FamilySpec& family, int n) {
  const ThetaDomain dom = theta_domain(family);
  const double hi = std::isinf(dom.hi) ? 3.0 : dom.hi;
  const double lo = std::isinf(dom.lo) ? hi - 6.0 : dom.lo;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = lo + (hi - lo) * (i + 1) / (n + 1);
  }
  return grid;
}

double interior_theta(const FamilySpec& family) {
  const ThetaDomain dom = theta_domain(family);
  if (std::isinf(dom.lo) && std::isinf(dom.hi)) return 0.0;
  if (std::isinf(dom.lo)) return dom.hi - 1.0;
  return 0.5 * (dom.lo + dom.hi);
}

// mean and variance with standard errors from n Monte Carlo draws
struct McMoments {
  double mean, mean_se, var, var_se;
  long n;
};

McMoments mc_moments(const std::vector<double>& xs) {
  const double mean = sample_mean(xs);
  const double var = sample_variance(xs);
  double m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m4 += d * d * d * d;
  }
  m4 /= xs.size();
  return {mean, std::sqrt(var / xs.size()), var,
          std::sqrt(std::max(0.0, m4 - var * var) / xs.size()),
          static_cast<long>(xs.size())};
}
}  // namespace

TEST_CASE("cumulant closed forms") {
  const CumulantValues w = cumulants(FamilySpec::wiener(), 2.0);
  CHECK(w.kappa == doctest::Approx(2.0));
  CHECK(w.kappa_prime == doctest::Approx(2.0));
  CHECK(w.kappa_double_prime == doctest::Approx(1.0));

  const CumulantValues p = cumulants(FamilySpec::poisson(), 0.0);
  CHECK(p.kappa == doctest::Approx(0.0));
  CHECK(p.kappa_prime == doctest::Approx(1.0));
  CHECK(p.kappa_double_prime == doctest::Approx(1.0));

  const CumulantValues h = cumulants(FamilySpec::hyperbolic_secant(), kPi / 2.0);
  CHECK(h.kappa_prime == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("theta domains") {
  const ThetaDomain g = theta_domain(FamilySpec::gamma());
  CHECK(g.lo == -kInf);
  CHECK(g.hi == 1.0);
  const ThetaDomain nb = theta_domain(FamilySpec::negative_binomial(0.5));
  CHECK(nb.hi == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const ThetaDomain w = theta_domain(FamilySpec::wiener());
  CHECK(w.lo == -kInf);
  CHECK(w.hi == kInf);
  for (const FamilySpec& family : all_families()) {
    CHECK(theta_domain(family).contains(0.0));
    CHECK(cumulants(family, 0.0).kappa == doctest::Approx(0.0));
  }
}

TEST_CASE("variance function coefficients") {
  const VarianceCoeffs w = variance_coeffs(FamilySpec::wiener());
  CHECK(w.a == 0.0);
  CHECK(w.b == 0.0);
  CHECK(w.c == 1.0);
  const VarianceCoeffs nb = variance_coeffs(FamilySpec::negative_binomial(0.3));
  CHECK(nb(2.0) == doctest::Approx(6.0));
  const VarianceCoeffs hs = variance_coeffs(FamilySpec::hyperbolic_secant());
  CHECK(hs.a == 0.5);
  CHECK(hs.b == 0.0);
  CHECK(hs.c == 0.5);
}

TEST_CASE("kappa'' = V(kappa') on 50-point interior grids") {
  for (const FamilySpec& family : all_families()) {
    const VarianceCoeffs coeffs = variance_coeffs(family);
    double max_dev = 0.0;
    for (double theta : theta_grid(family, 50)) {
      const CumulantValues c = cumulants(family, theta);
      max_dev = std::max(max_dev,
                         std::abs(c.kappa_double_prime - coeffs(c.kappa_prime)));
    }
    CHECK(max_dev <= 1e-10);
  }
}

TEST_CASE("central differences of kappa converge at order h^2") {
  for (const FamilySpec& family : all_families()) {
    const double theta = interior_theta(family) + 0.37;
    const ThetaDomain dom = theta_domain(family);
    if (!dom.contains(theta + 0.01) || !dom.contains(theta - 0.01)) continue;
    auto kappa = [&](double th) { return cumulants(family, th).kappa; };
    auto kprime = [&](double th) { return cumulants(family, th).kappa_prime; };
    auto err1 = [&](double h) {
      return std::abs((kappa(theta + h) - kappa(theta - h)) / (2.0 * h) -
                      cumulants(family, theta).kappa_prime);
    };
    auto err2 = [&](double h) {
      return std::abs((kprime(theta + h) - kprime(theta - h)) / (2.0 * h) -
                      cumulants(family, theta).kappa_double_prime);
    };
    if (family.kind != FamilyKind::Wiener) {  // Wiener differences are exact
      const double ratio1 = err1(1e-3) / err1(1e-4);
      const double ratio2 = err2(1e-3) / err2(1e-4);
      CHECK(ratio1 >= 25.0);
      CHECK(ratio1 <= 400.0);
      CHECK(ratio2 >= 25.0);
      CHECK(ratio2 <= 400.0);
    }
  }
}

TEST_CASE("density point values") {
  // Eq.-style closed forms evaluated independently
  CHECK(increment_density(FamilySpec::hyperbolic_secant(), 0.0, 1.0, 0.0) ==
        doctest::Approx(2.0 / kPi).epsilon(1e-12));
  CHECK(increment_density(FamilySpec::wiener(), 0.0, 1.0, 0.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * kPi)).epsilon(1e-13));
  CHECK(increment_density(FamilySpec::poisson(), 0.0, 2.0, 0.0) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-13));
  CHECK(increment_density(FamilySpec::poisson(), std::log(2.0), 1.0, 0.0) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-13));
  // discrete families vanish off the lattice
  CHECK(increment_density(FamilySpec::poisson(), 0.0, 1.0, 0.5) == 0.0);
  CHECK(increment_density(FamilySpec::negative_binomial(0.5), 0.0, 1.0, -1.0) == 0.0);
}

TEST_CASE("densities integrate or sum to one") {
  for (const FamilySpec& family : all_families()) {
    for (double t : {0.3, 1.0, 2.5}) {
      const double theta = interior_theta(family);
      double total;
      if (is_discrete(family)) {
        total = 0.0;
        double term = 1.0;
        for (int k = 0; k < 100000 && term > 1e-15; ++k) {
          term = increment_density(family, theta, t, k);
          total += term;
        }
      } else if (family.kind == FamilyKind::Gamma && t < 1.0) {
        // substitute x = v^{1/t} to remove the integrable singularity at 0
        total = integrate(
                    [&](double v) {
                      const double x = std::pow(v, 1.0 / t);
                      return increment_density(family, theta, t, x) *
                             std::pow(v, 1.0 / t - 1.0) / t;
                    },
                    0.0, kInf, 1e-10)
                    .value;
      } else {
        total = integrate(
                    [&](double x) { return increment_density(family, theta, t, x); },
                    -kInf, kInf, 1e-10)
                    .value;
      }
      CAPTURE(family_name(family));
      CAPTURE(t);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("increment sampler matches t kappa' and t kappa'' moments") {
  const int n = 100000;
  for (const FamilySpec& family : all_families()) {
    const double theta = interior_theta(family) + 0.4;
    const double t = 1.3;
    const CumulantValues c = cumulants(family, theta);
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) {
      RandomStream rng(7, i);
      xs[i] = increment_sample(family, theta, t, rng);
    }
    const McMoments m = mc_moments(xs);
    CAPTURE(family_name(family));
    CHECK(std::abs(m.mean - t * c.kappa_prime) <= 4.0 * m.mean_se);
    CHECK(std::abs(m.var - t * c.kappa_double_prime) <= 4.0 * m.var_se);
  }
}

TEST_CASE("negative binomial mixture sampler at fractional time") {
  const FamilySpec family = FamilySpec::negative_binomial(0.5);
  const double theta = 0.2, t = 0.5;
  const CumulantValues c = cumulants(family, theta);
  const int n = 100000;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) {
    RandomStream rng(11, i);
    xs[i] = increment_sample(family, theta, t, rng);
  }
  const McMoments m = mc_moments(xs);
  CHECK(std::abs(m.mean - t * c.kappa_prime) <= 4.0 * m.mean_se);
  CHECK(std::abs(m.var - t * c.kappa_double_prime) <= 4.0 * m.var_se);
}

TEST_CASE("tilted Poisson hits the mass function at zero") {
  // law of the t = 1 increment at theta = log 2 is Poisson(2)
  const FamilySpec family = FamilySpec::poisson();
  const int n = 100000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) {
    RandomStream rng(3, i);
    if (increment_sample(family, std::log(2.0), 1.0, rng) == 0.0) ++zeros;
  }
  const double p0 = std::exp(-2.0);
  const double se = std::sqrt(p0 * (1.0 - p0) / n);
  CHECK(std::abs(static_cast<double>(zeros) / n - p0) <= 4.0 * se);
}

TEST_CASE("sum of independent increments matches a single longer increment") {
  const double t1 = 0.6, t2 = 1.1;
  for (const FamilySpec& family : all_families()) {
    const double theta = interior_theta(family) - 0.2;
    const int n = 100000;
    std::vector<double> split(n), whole(n);
    for (int i = 0; i < n; ++i) {
      RandomStream rng_a(21, i);
      RandomStream rng_b(22, i);
      split[i] = increment_sample(family, theta, t1, rng_a) +
                 increment_sample(family, theta, t2, rng_a);
      whole[i] = increment_sample(family, theta, t1 + t2, rng_b);
    }
    const McMoments ms = mc_moments(split);
    const McMoments mw = mc_moments(whole);
    CAPTURE(family_name(family));
    CHECK(std::abs(ms.mean - mw.mean) <=
          4.0 * std::sqrt(ms.mean_se * ms.mean_se + mw.mean_se * mw.mean_se));
    CHECK(std::abs(ms.var - mw.var) <=
          4.0 * std::sqrt(ms.var_se * ms.var_se + mw.var_se * mw.var_se));
  }
}

TEST_CASE("secant sampler matches its density in distribution") {
  // chi-square test over equal-probability bins; exercises the knot-mixture
  // rejection path (theta off every knot)
  const FamilySpec family = FamilySpec::hyperbolic_secant();
  const double theta = 1.217, t = 0.8;
  const int bins = 25;
  const int n = 50000;
  // bin edges from the CDF by direct quadrature
  std::vector<double> edges(bins + 1);
  edges[0] = -kInf;
  edges[bins] = kInf;
  for (int b = 1; b < bins; ++b) {
    const double target = static_cast<double>(b) / bins;
    double lo = -60.0, hi = 60.0;
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      const double mass =
          integrate([&](double x) { return increment_density(family, theta, t, x); },
                    -kInf, mid, 1e-9)
              .value;
      (mass < target ? lo : hi) = mid;
    }
    edges[b] = 0.5 * (lo + hi);
  }
  std::vector<int> counts(bins, 0);
  for (int i = 0; i < n; ++i) {
    RandomStream rng(5, i);
    const double x = increment_sample(family, theta, t, rng);
    int b = 0;
    while (b + 1 < bins && x > edges[b + 1]) ++b;
    ++counts[b];
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(n) / bins;
  for (int b = 0; b < bins; ++b) {
    const double d = counts[b] - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi_square_pvalue(chi2, bins - 1) > 1e-3);
}

TEST_CASE("boundary and argument errors") {
  CHECK_THROWS_AS(cumulants(FamilySpec::gamma(), 1.0), DomainError);
  CHECK_THROWS_AS(cumulants(FamilySpec::hyperbolic_secant(), kPi), DomainError);
  CHECK_THROWS_AS(increment_density(FamilySpec::gamma(), 1.5, 1.0, 1.0), DomainError);
  RandomStream rng(1, 1);
  CHECK_THROWS_AS(increment_sample(FamilySpec::wiener(), 0.0, 0.0, rng),
                  ArgumentError);
  CHECK_THROWS_AS(increment_sample(FamilySpec::wiener(), 0.0, -1.0, rng),
                  ArgumentError);
  CHECK_THROWS_AS(FamilySpec::negative_binomial(1.0), ArgumentError);
  CHECK_THROWS_AS(parse_family("cauchy", 0.5), ArgumentError);
}
