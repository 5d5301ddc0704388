#include <doctest.h>

#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

#include "bimeixner/errors.hpp"
#include "bimeixner/randomization.hpp"
#include "bimeixner/stats.hpp"

using namespace bimeixner;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
const double kInf = std::numeric_limits<double>::infinity();

// log of the Gaussian-integral normalizer for the Wiener randomization:
// C = sqrt(r/2pi) exp(-p^2/(2r))
double wiener_log_c_oracle(double p, double r) {
  return 0.5 * std::log(r / (2.0 * kPi)) - p * p / (2.0 * r);
}

double quadrature_log_c(const FamilySpec& family, double p, double r) {
  const ThetaDomain dom = theta_domain(family);
  // shift by the integrand's maximum for range safety
  double shift = 0.0;
  try {
    const double mode = kprime_inverse(family, p / r);
    shift = p * mode - r * cumulants(family, mode).kappa;
  } catch (const ArgumentError&) {
    shift = 0.0;
  }
  const double integral =
      integrate(
          [&](double theta) {
            return std::exp(p * theta - r * cumulants(family, theta).kappa - shift);
          },
          dom.lo, dom.hi, 1e-12)
          .value;
  return -(shift + std::log(integral));
}
}  // namespace

TEST_CASE("closed-form normalizing constants agree with quadrature") {
  struct Point {
    FamilySpec family;
    double p, r;
  };
  const std::vector<Point> points = {
      {FamilySpec::wiener(), 2.0, 4.0},      {FamilySpec::wiener(), -1.5, 0.7},
      {FamilySpec::poisson(), 1.0, 1.0},     {FamilySpec::poisson(), 3.0, 2.5},
      {FamilySpec::gamma(), 3.0, 2.0},       {FamilySpec::gamma(), 1.0, 4.0},
      {FamilySpec::negative_binomial(0.5), 2.0, 3.0},
      {FamilySpec::negative_binomial(0.25), 1.5, 2.0},
  };
  for (const Point& pt : points) {
    const double closed = normalizing_constant(pt.family, pt.p, pt.r);
    const double quad = quadrature_log_c(pt.family, pt.p, pt.r);
    CAPTURE(family_name(pt.family));
    CHECK(closed == doctest::Approx(quad).epsilon(1e-9));
  }
  // spec'd Gaussian oracle
  CHECK(normalizing_constant(FamilySpec::wiener(), 2.0, 4.0) ==
        doctest::Approx(wiener_log_c_oracle(2.0, 4.0)).epsilon(1e-14));
  // Poisson(1,1) reduces to the Gamma normalizer: C = e^{-1}
  CHECK(normalizing_constant(FamilySpec::poisson(), 1.0, 1.0) ==
        doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("secant normalizing constant") {
  // C(0,1) = 1/pi since the weight integrates to pi
  CHECK(normalizing_constant(FamilySpec::hyperbolic_secant(), 0.0, 1.0) ==
        doctest::Approx(std::log(1.0 / kPi)).epsilon(1e-11));
  // closed form via |Gamma(r+1+ip)|^2: C = 2^{2r} |Gamma(r+1+ip)|^2 / (2 pi Gamma(2r+1))
  for (const auto& [p, r] : std::vector<std::pair<double, double>>{
           {0.0, 1.0}, {1.0, 2.0}, {-2.0, 3.5}, {0.7, 0.8}}) {
    const double oracle = 2.0 * r * std::log(2.0) + std::log(abs_gamma_sq(r + 1.0, p)) -
                          std::log(2.0 * kPi) - ln_gamma(2.0 * r + 1.0);
    CHECK(normalizing_constant(FamilySpec::hyperbolic_secant(), p, r) ==
          doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("theta log density values") {
  const RandomizationLaw secant =
      make_randomization_law(FamilySpec::hyperbolic_secant(), 0.0, 1.0);
  CHECK(theta_log_density(secant, 0.0) ==
        doctest::Approx(std::log(1.0 / kPi)).epsilon(1e-10));
  CHECK(theta_log_density(secant, kPi) == -kInf);
  CHECK(theta_log_density(secant, 4.0) == -kInf);

  const RandomizationLaw wiener =
      make_randomization_law(FamilySpec::wiener(), 0.0, 1.0);
  CHECK(theta_log_density(wiener, 0.0) ==
        doctest::Approx(std::log(1.0 / std::sqrt(2.0 * kPi))).epsilon(1e-13));
}

TEST_CASE("normalized density integrates to one") {
  for (const auto& [family, p, r] : std::vector<std::tuple<FamilySpec, double, double>>{
           {FamilySpec::wiener(), -3.0, 0.5},
           {FamilySpec::poisson(), 2.0, 1.0},
           {FamilySpec::gamma(), 3.0, 2.0},
           {FamilySpec::negative_binomial(0.5), 2.0, 3.0},
           {FamilySpec::hyperbolic_secant(), 1.0, 2.0}}) {
    const RandomizationLaw law = make_randomization_law(family, p, r);
    const ThetaDomain dom = theta_domain(family);
    const double mass =
        integrate([&](double th) { return std::exp(theta_log_density(law, th)); },
                  dom.lo, dom.hi, 1e-10)
            .value;
    CAPTURE(family_name(family));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("closed-form moments of kappa'(Theta)") {
  const RandomizationLaw wiener = make_randomization_law(FamilySpec::wiener(), 2.0, 4.0);
  const KPrimeMoments mw = kprime_moments(wiener);
  CHECK(mw.mean == doctest::Approx(0.5));
  CHECK(mw.variance == doctest::Approx(0.25));

  const RandomizationLaw nb =
      make_randomization_law(FamilySpec::negative_binomial(0.5), 2.0, 3.0);
  const KPrimeMoments mnb = kprime_moments(nb);
  CHECK(mnb.mean == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(mnb.variance == doctest::Approx(5.0 / 9.0).epsilon(1e-14));

  const RandomizationLaw hs =
      make_randomization_law(FamilySpec::hyperbolic_secant(), 0.0, 1.0);
  const KPrimeMoments mhs = kprime_moments(hs);
  CHECK(mhs.mean == doctest::Approx(0.0));
  CHECK(mhs.variance == doctest::Approx(1.0));
}

TEST_CASE("closed-form moments agree with quadrature") {
  for (const auto& [family, p, r] : std::vector<std::tuple<FamilySpec, double, double>>{
           {FamilySpec::wiener(), 2.0, 4.0},
           {FamilySpec::poisson(), 3.0, 2.0},
           {FamilySpec::gamma(), 3.0, 4.0},
           {FamilySpec::negative_binomial(0.5), 2.0, 3.0},
           {FamilySpec::hyperbolic_secant(), 1.0, 2.0}}) {
    const RandomizationLaw law = make_randomization_law(family, p, r);
    const KPrimeMoments closed = kprime_moments(law);
    const KPrimeMoments quad = kprime_moments_by_quadrature(law);
    CAPTURE(family_name(family));
    CHECK(quad.mean == doctest::Approx(closed.mean).epsilon(1e-8));
    CHECK(quad.variance == doctest::Approx(closed.variance).epsilon(1e-8));
  }
}

TEST_CASE("transformed-law samplers match the spec'd representations") {
  // Poisson: Theta = log(Lambda), Lambda ~ Gamma(3, 2); so E Lambda = 3/2
  const RandomizationLaw poisson =
      make_randomization_law(FamilySpec::poisson(), 3.0, 2.0);
  // NegativeBinomial q=1/2, p=2, r=3: Pi = q e^Theta ~ Beta(2, 4)
  const RandomizationLaw nb =
      make_randomization_law(FamilySpec::negative_binomial(0.5), 2.0, 3.0);
  const int n = 200000;
  std::vector<double> lam(n), pi_draw(n);
  for (int i = 0; i < n; ++i) {
    RandomStream rng(31, i);
    lam[i] = std::exp(sample_theta(poisson, rng));
    RandomStream rng2(32, i);
    pi_draw[i] = 0.5 * std::exp(sample_theta(nb, rng2));
  }
  CHECK(sample_mean(lam) == doctest::Approx(1.5).epsilon(0.01));
  CHECK(sample_variance(lam) == doctest::Approx(0.75).epsilon(0.02));
  // Beta(2,4): mean 1/3, variance 8/252
  CHECK(sample_mean(pi_draw) == doctest::Approx(1.0 / 3.0).epsilon(0.01));
  CHECK(sample_variance(pi_draw) == doctest::Approx(8.0 / 252.0).epsilon(0.03));
}

TEST_CASE("Monte Carlo moments of kappa'(Theta) at three points per family") {
  struct Point {
    FamilySpec family;
    double p, r;
  };
  const std::vector<Point> points = {
      {FamilySpec::wiener(), 2.0, 4.0},
      {FamilySpec::wiener(), 0.0, 1.0},
      {FamilySpec::wiener(), -3.0, 0.5},
      {FamilySpec::poisson(), 3.0, 2.0},
      {FamilySpec::poisson(), 1.0, 1.0},
      {FamilySpec::poisson(), 4.0, 1.0},
      {FamilySpec::gamma(), 3.0, 4.0},
      {FamilySpec::gamma(), 2.0, 5.0},
      {FamilySpec::gamma(), 1.0, 6.0},
      {FamilySpec::negative_binomial(0.5), 2.0, 4.0},
      {FamilySpec::negative_binomial(0.5), 3.0, 5.0},
      {FamilySpec::negative_binomial(0.25), 1.0, 4.5},
      {FamilySpec::hyperbolic_secant(), 0.0, 2.0},
      {FamilySpec::hyperbolic_secant(), 1.0, 2.5},
      {FamilySpec::hyperbolic_secant(), -2.0, 3.0},
  };
  const int n = 200000;
  for (const Point& pt : points) {
    const RandomizationLaw law = make_randomization_law(pt.family, pt.p, pt.r);
    const KPrimeMoments closed = kprime_moments(law);
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) {
      RandomStream rng(97, i);
      draws[i] = cumulants(pt.family, sample_theta(law, rng)).kappa_prime;
    }
    const double mean = sample_mean(draws);
    const double var = sample_variance(draws);
    double m4 = 0.0;
    for (double d : draws) {
      const double c = d - mean;
      m4 += c * c * c * c;
    }
    m4 /= n;
    const double mean_se = std::sqrt(var / n);
    const double var_se = std::sqrt(std::max(0.0, m4 - var * var) / n);
    CAPTURE(family_name(pt.family));
    CAPTURE(pt.p);
    CAPTURE(pt.r);
    CHECK(std::abs(mean - closed.mean) <= 4.0 * mean_se);
    CHECK(std::abs(var - closed.variance) <= 4.0 * var_se);
  }
}

TEST_CASE("sampled theta always stays strictly inside the open domain") {
  for (const auto& [family, p, r] : std::vector<std::tuple<FamilySpec, double, double>>{
           {FamilySpec::poisson(), 1.0, 1.0},
           {FamilySpec::gamma(), 2.0, 2.0},
           {FamilySpec::negative_binomial(0.5), 2.0, 2.0},
           {FamilySpec::hyperbolic_secant(), 0.5, 0.75}}) {
    const RandomizationLaw law = make_randomization_law(family, p, r);
    const ThetaDomain dom = theta_domain(family);
    bool all_inside = true;
    for (int i = 0; i < 1000000; ++i) {
      RandomStream rng(55, i);
      const double theta = sample_theta(law, rng);
      all_inside = all_inside && dom.contains(theta);
    }
    CAPTURE(family_name(family));
    CHECK(all_inside);
  }
}

TEST_CASE("admissibility domain is enforced strictly") {
  CHECK_THROWS_AS(make_randomization_law(FamilySpec::wiener(), 1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(make_randomization_law(FamilySpec::poisson(), 0.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(make_randomization_law(FamilySpec::gamma(), 1.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(make_randomization_law(FamilySpec::negative_binomial(0.5), 1.0, 1.0),
                  ArgumentError);
  CHECK_THROWS_AS(make_randomization_law(FamilySpec::hyperbolic_secant(), 0.0, 0.5),
                  ArgumentError);
  CHECK_NOTHROW(make_randomization_law(FamilySpec::hyperbolic_secant(), -1.0, 0.51));
}

TEST_CASE("boundary decay assumptions") {
  // gamma with r > 1 passes at the default probes
  const AssumptionReport pass_report =
      check_assumptions(FamilySpec::gamma(), 1.0, 2.0, {0.0});
  CHECK(pass_report.pass);

  // gamma with r < 1: kappa' e^{...} ~ (1-theta)^{r-1} diverges at theta -> 1
  const AssumptionReport fail_report =
      check_assumptions(FamilySpec::gamma(), 1.0, 0.5, {0.0});
  CHECK_FALSE(fail_report.pass);
  bool upper_weighted_failed = false;
  for (const AssumptionEndpointStatus& e : fail_report.entries) {
    if (e.upper_endpoint) {
      CHECK(e.decay_pass);  // the plain factor still vanishes
      upper_weighted_failed = upper_weighted_failed || !e.weighted_decay_pass;
    }
  }
  CHECK(upper_weighted_failed);

  // Wiener passes for any p and tiny r
  CHECK(check_assumptions(FamilySpec::wiener(), -3.0, 0.1, {0.0}).pass);

  // default probes stay in the support
  for (double x : default_support_points(FamilySpec::poisson())) {
    CHECK(x >= 0.0);
    CHECK(x == std::round(x));
  }
}
