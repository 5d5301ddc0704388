#include "bimeixner/family.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "bimeixner/errors.hpp"
#include "bimeixner/quadrature.hpp"
#include "bimeixner/stats.hpp"

namespace bimeixner {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

void require_interior(const FamilySpec& family, double theta) {
  const ThetaDomain dom = theta_domain(family);
  if (!dom.contains(theta)) {
    throw DomainError("theta " + std::to_string(theta) +
                      " outside the open domain of " + family_name(family));
  }
}

void require_positive_time(double t) {
  if (!(t > 0.0)) throw ArgumentError("time length t must be > 0");
}

bool nonnegative_integer(double x, double& k) {
  k = std::round(x);
  return k >= 0.0 && std::abs(x - k) <= 1e-9;
}
}  // namespace

FamilySpec FamilySpec::negative_binomial(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw ArgumentError("negative binomial requires 0 < q < 1");
  }
  return {FamilyKind::NegativeBinomial, q};
}

FamilySpec parse_family(const std::string& name, double q) {
  if (name == "wiener") return FamilySpec::wiener();
  if (name == "poisson") return FamilySpec::poisson();
  if (name == "gamma") return FamilySpec::gamma();
  if (name == "negative-binomial" || name == "nb") {
    return FamilySpec::negative_binomial(q);
  }
  if (name == "secant" || name == "hyperbolic-secant") {
    return FamilySpec::hyperbolic_secant();
  }
  throw ArgumentError("unknown family '" + name + "'");
}

std::string family_name(const FamilySpec& family) {
  switch (family.kind) {
    case FamilyKind::Wiener: return "wiener";
    case FamilyKind::Poisson: return "poisson";
    case FamilyKind::Gamma: return "gamma";
    case FamilyKind::NegativeBinomial: return "negative-binomial";
    case FamilyKind::HyperbolicSecant: return "secant";
  }
  return "?";
}

ThetaDomain theta_domain(const FamilySpec& family) {
  const double inf = std::numeric_limits<double>::infinity();
  switch (family.kind) {
    case FamilyKind::Wiener: return {-inf, inf};
    case FamilyKind::Poisson: return {-inf, inf};
    case FamilyKind::Gamma: return {-inf, 1.0};
    case FamilyKind::NegativeBinomial: return {-inf, -std::log(family.q)};
    case FamilyKind::HyperbolicSecant: return {-kPi, kPi};
  }
  return {0.0, 0.0};
}

VarianceCoeffs variance_coeffs(const FamilySpec& family) {
  switch (family.kind) {
    case FamilyKind::Wiener: return {0.0, 0.0, 1.0};
    case FamilyKind::Poisson: return {0.0, 1.0, 0.0};
    case FamilyKind::Gamma: return {1.0, 0.0, 0.0};
    case FamilyKind::NegativeBinomial: return {1.0, 1.0, 0.0};
    case FamilyKind::HyperbolicSecant: return {0.5, 0.0, 0.5};
  }
  return {0.0, 0.0, 0.0};
}

CumulantValues cumulants(const FamilySpec& family, double theta) {
  require_interior(family, theta);
  switch (family.kind) {
    case FamilyKind::Wiener:
      return {0.5 * theta * theta, theta, 1.0};
    case FamilyKind::Poisson: {
      const double e = std::exp(theta);
      return {e - 1.0, e, e};
    }
    case FamilyKind::Gamma: {
      const double w = 1.0 - theta;
      return {-std::log(w), 1.0 / w, 1.0 / (w * w)};
    }
    case FamilyKind::NegativeBinomial: {
      const double qe = family.q * std::exp(theta);
      const double w = 1.0 - qe;
      return {std::log1p(-family.q) - std::log1p(-qe), qe / w, qe / (w * w)};
    }
    case FamilyKind::HyperbolicSecant: {
      const double c = std::cos(0.5 * theta);
      const double kp = std::tan(0.5 * theta);
      return {-2.0 * std::log(c), kp, 0.5 / (c * c)};
    }
  }
  throw ArgumentError("unreachable family kind");
}

double kprime_inverse(const FamilySpec& family, double m) {
  switch (family.kind) {
    case FamilyKind::Wiener:
      return m;
    case FamilyKind::Poisson:
      if (!(m > 0.0)) throw ArgumentError("kprime_inverse: mean must be > 0");
      return std::log(m);
    case FamilyKind::Gamma:
      if (!(m > 0.0)) throw ArgumentError("kprime_inverse: mean must be > 0");
      return 1.0 - 1.0 / m;
    case FamilyKind::NegativeBinomial:
      if (!(m > 0.0)) throw ArgumentError("kprime_inverse: mean must be > 0");
      return std::log(m / (family.q * (1.0 + m)));
    case FamilyKind::HyperbolicSecant:
      return 2.0 * std::atan(m);
  }
  throw ArgumentError("unreachable family kind");
}

double increment_log_density(const FamilySpec& family, double theta, double t,
                             double x) {
  require_interior(family, theta);
  require_positive_time(t);
  const double kNegInf = -std::numeric_limits<double>::infinity();
  switch (family.kind) {
    case FamilyKind::Wiener: {
      const double d = x - t * theta;
      return -0.5 * d * d / t - 0.5 * std::log(2.0 * kPi * t);
    }
    case FamilyKind::Poisson: {
      double k;
      if (!nonnegative_integer(x, k)) return kNegInf;
      const double lam = t * std::exp(theta);
      return -lam + k * std::log(lam) - ln_gamma(k + 1.0);
    }
    case FamilyKind::Gamma: {
      if (!(x > 0.0)) return kNegInf;
      const double rate = 1.0 - theta;
      return t * std::log(rate) + (t - 1.0) * std::log(x) - rate * x -
             ln_gamma(t);
    }
    case FamilyKind::NegativeBinomial: {
      double k;
      if (!nonnegative_integer(x, k)) return kNegInf;
      const double qt = family.q * std::exp(theta);
      return ln_gamma(t + k) - ln_gamma(t) - ln_gamma(k + 1.0) +
             t * std::log1p(-qt) + k * std::log(qt);
    }
    case FamilyKind::HyperbolicSecant: {
      double lr, li;
      log_gamma_complex(t, x, lr, li);
      return 2.0 * t * std::log(2.0 * std::cos(0.5 * theta)) -
             std::log(2.0 * kPi) - ln_gamma(2.0 * t) + 2.0 * lr + theta * x;
    }
  }
  throw ArgumentError("unreachable family kind");
}

double increment_density(const FamilySpec& family, double theta, double t,
                         double x) {
  return std::exp(increment_log_density(family, theta, t, x));
}

// ---------------------------------------------------------------------------
// Hyperbolic secant (Meixner) tilted-increment sampler.
//
// Inverse-CDF tables are cached per (t, theta) with theta restricted to a
// fixed knot set.  For an arbitrary tilt theta in [theta_k, theta_{k+1}] we
// draw from the two-component proposal
//     (1-lambda) f(.|theta_k) + lambda f(.|theta_{k+1}),
// lambda = (theta - theta_k)/(theta_{k+1} - theta_k), and accept with
// probability e^{theta x} / ((1-lambda) e^{theta_k x} + lambda e^{theta_{k+1} x}),
// which is a valid envelope by the weighted AM-GM inequality.  Tilts beyond
// the outermost knots (|theta| > pi - 1e-6) fall back to a one-off table.

namespace {

double meixner_density(double t, double theta, double x) {
  return increment_density(FamilySpec::hyperbolic_secant(), theta, t, x);
}

// Truncation bounds [lo, hi] holding all but ~1e-13 of the tilted mass.
// The tails decay like e^{-(pi -+ theta) |x|}, so density/rate estimates the
// remaining tail mass.
void meixner_support(double t, double theta, double& lo, double& hi) {
  const CumulantValues c = cumulants(FamilySpec::hyperbolic_secant(), theta);
  const double mean = t * c.kappa_prime;
  const double sd = std::sqrt(t * c.kappa_double_prime);
  const double rate_hi = kPi - theta;
  const double rate_lo = kPi + theta;
  hi = mean + 12.0 * sd + 5.0 / rate_hi;
  while (meixner_density(t, theta, hi) / rate_hi > 1e-13) {
    hi = mean + 1.6 * (hi - mean);
    if (hi - mean > 1e12) break;
  }
  lo = mean - 12.0 * sd - 5.0 / rate_lo;
  while (meixner_density(t, theta, lo) / rate_lo > 1e-13) {
    lo = mean - 1.6 * (mean - lo);
    if (mean - lo > 1e12) break;
  }
}

InverseCdfTable build_meixner_table(double t, double theta, double tol) {
  double lo, hi;
  meixner_support(t, theta, lo, hi);
  return tabulate_inverse_cdf(
      [t, theta](double x) { return meixner_density(t, theta, x); }, lo, hi,
      tol);
}

class MeixnerTiltedSampler {
 public:
  explicit MeixnerTiltedSampler(double t) : t_(t) {
    // Knot spacing keeps the rejection acceptance rate above ~0.4:
    // the chord gap of kappa costs exp(-t kappa'' d^2/8) and the Jensen gap
    // of the two-point mixture costs ~1/cosh(t |kappa_{k+1}-kappa_k| / 2).
    const double edge = kPi - 1e-6;
    std::vector<double> right;
    double theta = 0.0;
    right.push_back(theta);
    while (theta < edge) {
      const CumulantValues c = cumulants(FamilySpec::hyperbolic_secant(), theta);
      double step = std::min(
          {1.3 / std::sqrt(std::max(1.0, t_ * c.kappa_double_prime)),
           2.0 / std::max(1.0, t_ * std::abs(c.kappa_prime)), 0.25});
      theta = std::min(theta + step, edge);
      right.push_back(theta);
    }
    knots_.reserve(2 * right.size() - 1);
    for (std::size_t i = right.size(); i-- > 1;) knots_.push_back(-right[i]);
    for (double v : right) knots_.push_back(v);
    log_z_.resize(knots_.size());
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      log_z_[i] = t_ * cumulants(FamilySpec::hyperbolic_secant(), knots_[i]).kappa;
    }
    tables_ = std::make_unique<std::atomic<const InverseCdfTable*>[]>(knots_.size());
    for (std::size_t i = 0; i < knots_.size(); ++i) tables_[i].store(nullptr);
  }

  double draw(double theta, RandomStream& rng) const {
    if (theta <= knots_.front() || theta >= knots_.back()) {
      const InverseCdfTable one_off = build_meixner_table(t_, theta, 1e-9);
      return one_off.sample(rng.next_uniform());
    }
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), theta);
    const std::size_t k = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double th0 = knots_[k], th1 = knots_[k + 1];
    const double lambda = (theta - th0) / (th1 - th0);
    // component weights (1-lambda) Z_0 and lambda Z_1, computed in log space
    const double lw0 = (lambda < 1.0 ? std::log1p(-lambda) : -1e300) + log_z_[k];
    const double lw1 = (lambda > 0.0 ? std::log(lambda) : -1e300) + log_z_[k + 1];
    const double lmax = std::max(lw0, lw1);
    const double w0 = std::exp(lw0 - lmax);
    const double w1 = std::exp(lw1 - lmax);
    const double p0 = w0 / (w0 + w1);
    for (;;) {
      const bool use0 = rng.next_uniform() < p0;
      const double x = table(use0 ? k : k + 1).sample(rng.next_uniform());
      const double e0 = (th0 - theta) * x;
      const double e1 = (th1 - theta) * x;
      if (e0 > 700.0 || e1 > 700.0) continue;  // acceptance underflows to 0
      const double accept =
          1.0 / ((1.0 - lambda) * std::exp(e0) + lambda * std::exp(e1));
      if (rng.next_uniform() < accept) return x;
    }
  }

 private:
  const InverseCdfTable& table(std::size_t k) const {
    const InverseCdfTable* p = tables_[k].load(std::memory_order_acquire);
    if (p == nullptr) {
      std::lock_guard<std::mutex> lock(build_mutex_);
      p = tables_[k].load(std::memory_order_relaxed);
      if (p == nullptr) {
        auto built = std::make_unique<InverseCdfTable>(
            build_meixner_table(t_, knots_[k], 1e-9));
        p = built.get();
        owned_.push_back(std::move(built));
        tables_[k].store(p, std::memory_order_release);
      }
    }
    return *p;
  }

  double t_;
  std::vector<double> knots_;
  std::vector<double> log_z_;
  std::unique_ptr<std::atomic<const InverseCdfTable*>[]> tables_;
  mutable std::mutex build_mutex_;
  mutable std::vector<std::unique_ptr<const InverseCdfTable>> owned_;
};

const MeixnerTiltedSampler& meixner_sampler_for(double t) {
  static std::mutex cache_mutex;
  static std::map<std::uint64_t, std::unique_ptr<MeixnerTiltedSampler>> cache;
  std::uint64_t key;
  std::memcpy(&key, &t, sizeof key);
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<MeixnerTiltedSampler>(t);
  return *slot;
}

}  // namespace

double increment_sample(const FamilySpec& family, double theta, double t,
                        RandomStream& rng) {
  require_interior(family, theta);
  require_positive_time(t);
  switch (family.kind) {
    case FamilyKind::Wiener:
      return t * theta + std::sqrt(t) * rng.next_normal();
    case FamilyKind::Poisson:
      return static_cast<double>(rng.next_poisson(t * std::exp(theta)));
    case FamilyKind::Gamma:
      return rng.next_gamma(t, 1.0 - theta);
    case FamilyKind::NegativeBinomial: {
      // NB(q e^theta, t) as a Poisson-Gamma mixture; exact for any t > 0.
      const double qt = family.q * std::exp(theta);
      const double lam = rng.next_gamma(t, (1.0 - qt) / qt);
      return static_cast<double>(rng.next_poisson(lam));
    }
    case FamilyKind::HyperbolicSecant:
      return meixner_sampler_for(t).draw(theta, rng);
  }
  throw ArgumentError("unreachable family kind");
}

}  // namespace bimeixner
