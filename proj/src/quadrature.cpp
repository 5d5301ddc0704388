#include "bimeixner/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "bimeixner/errors.hpp"

namespace bimeixner {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15).
const double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
const double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
const double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double a, b;
  double value;
  double error;
  bool at_roundoff = false;  // error estimate is dominated by roundoff
};

struct ByError {
  bool operator()(const Interval& x, const Interval& y) const {
    return x.error < y.error;
  }
};

Interval qk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resg = kWg[3] * fc;
  double resk = kWgk[7] * fc;
  double resabs = std::abs(resk);
  double fv[15];
  fv[7] = fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv[j] = f1;
    fv[14 - j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
  }
  resg *= half;
  resk *= half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);

  double err = std::abs(resk - resg);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double eps = std::numeric_limits<double>::epsilon();
  const double minerr = 50.0 * eps * resabs;
  bool at_roundoff = false;
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps) && err <= minerr) {
    err = minerr;
    at_roundoff = true;
  }
  return {a, b, resk, err, at_roundoff};
}

constexpr int kMaxIntervals = 10000;

QuadratureResult adaptive_finite(const std::function<double(double)>& f,
                                 double a, double b, double rel_tol) {
  std::priority_queue<Interval, std::vector<Interval>, ByError> heap;
  // Seed with several panels so narrow interior features cannot slip
  // between the nodes of a single 15-point rule.
  constexpr int kSeedPanels = 8;
  double total = 0.0;
  double total_err = 0.0;
  for (int i = 0; i < kSeedPanels; ++i) {
    const double x0 = a + (b - a) * i / kSeedPanels;
    const double x1 = a + (b - a) * (i + 1) / kSeedPanels;
    Interval panel = qk15(f, x0, x1);
    total += panel.value;
    total_err += panel.error;
    heap.push(panel);
  }
  int n = kSeedPanels;
  double done_err = 0.0;  // intervals no further splitting can improve
  auto tolerance = [&]() { return rel_tol * std::max(1.0, std::abs(total)); };
  while (done_err + total_err > tolerance() && n < kMaxIntervals && !heap.empty()) {
    Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (worst.at_roundoff || mid <= worst.a || mid >= worst.b) {
      done_err += worst.error;
      total_err -= worst.error;
      continue;
    }
    Interval left = qk15(f, worst.a, mid);
    Interval right = qk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++n;
  }
  QuadratureResult result;
  result.value = total;
  result.abs_error_estimate = done_err + total_err;
  result.subdivisions = n;
  result.converged = result.abs_error_estimate <= tolerance();
  return result;
}

}  // namespace

QuadratureResult integrate_nothrow(const std::function<double(double)>& f,
                                   double a, double b, double rel_tol) {
  if (!(rel_tol >= 1e-14 && rel_tol <= 1e-4)) {
    throw ArgumentError("integrate: rel_tol must lie in [1e-14, 1e-4]");
  }
  if (!(a < b)) throw ArgumentError("integrate: requires a < b");

  const bool lo_inf = std::isinf(a);
  const bool hi_inf = std::isinf(b);
  if (!lo_inf && !hi_inf) return adaptive_finite(f, a, b, rel_tol);

  if (lo_inf && hi_inf) {
    // x = u/(1-u^2), u in (-1,1)
    auto g = [&f](double u) {
      const double d = 1.0 - u * u;
      const double x = u / d;
      return f(x) * (1.0 + u * u) / (d * d);
    };
    return adaptive_finite(g, -1.0, 1.0, rel_tol);
  }
  if (!lo_inf) {
    // x = a + u/(1-u), u in (0,1)
    auto g = [&f, a](double u) {
      const double d = 1.0 - u;
      return f(a + u / d) / (d * d);
    };
    return adaptive_finite(g, 0.0, 1.0, rel_tol);
  }
  // x = b - u/(1-u), u in (0,1)
  auto g = [&f, b](double u) {
    const double d = 1.0 - u;
    return f(b - u / d) / (d * d);
  };
  return adaptive_finite(g, 0.0, 1.0, rel_tol);
}

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double rel_tol) {
  QuadratureResult result = integrate_nothrow(f, a, b, rel_tol);
  if (!result.converged) {
    throw IntegrationError("integrate: subdivision budget exhausted");
  }
  return result;
}

// ---------------------------------------------------------------------------
// Complex log-gamma (Lanczos, g = 671/128)

namespace {

const double kLanczosG = 5.24218750000000000;  // 671/128
const double kLanczosC0 = 0.999999999999997092;
const double kLanczosCoef[14] = {
    57.1562356658629235,     -59.5979603554754912,
    14.1360979747417471,     -0.491913816097620199,
    0.339946499848118887e-4, 0.465236289270485756e-4,
    -0.983744753048795646e-4, 0.158088703224912494e-3,
    -0.210264441724104883e-3, 0.217439618115212643e-3,
    -0.164318106536763890e-3, 0.844182239838527433e-4,
    -0.261908384015814087e-4, 0.368991826595316234e-5};
const double kSqrt2Pi = 2.5066282746310005;

}  // namespace

void log_gamma_complex(double re, double im, double& out_re, double& out_im) {
  if (!(re > 0.0)) {
    throw ArgumentError("log_gamma_complex: requires Re(z) > 0");
  }
  // Shift small real parts up for full Lanczos accuracy, then undo with
  // log Gamma(z) = log Gamma(z+k) - sum log(z+j).
  int shift = 0;
  while (re + shift < 1.5) ++shift;
  double acc_re = 0.0, acc_im = 0.0;
  for (int j = 0; j < shift; ++j) {
    const double zr = re + j, zi = im;
    acc_re += 0.5 * std::log(zr * zr + zi * zi);
    acc_im += std::atan2(zi, zr);
  }
  const double x = re + shift;
  const double y = im;

  // ser = c0 + sum c_j / (z + j)
  double ser_re = kLanczosC0, ser_im = 0.0;
  for (int j = 0; j < 14; ++j) {
    const double dr = x + j + 1.0, di = y;
    const double denom = dr * dr + di * di;
    ser_re += kLanczosCoef[j] * dr / denom;
    ser_im -= kLanczosCoef[j] * di / denom;
  }
  const double tr = x + kLanczosG, ti = y;
  const double log_t_re = 0.5 * std::log(tr * tr + ti * ti);
  const double log_t_im = std::atan2(ti, tr);
  // (z + 0.5) * log(t) - t
  double res_re = (x + 0.5) * log_t_re - y * log_t_im - tr;
  double res_im = (x + 0.5) * log_t_im + y * log_t_re - ti;
  // + log(sqrt(2 pi) * ser / z)
  const double sr = kSqrt2Pi * ser_re, si = kSqrt2Pi * ser_im;
  const double zr = x, zi = y;
  const double zden = zr * zr + zi * zi;
  const double qr = (sr * zr + si * zi) / zden;
  const double qi = (si * zr - sr * zi) / zden;
  res_re += 0.5 * std::log(qr * qr + qi * qi);
  res_im += std::atan2(qi, qr);

  out_re = res_re - acc_re;
  out_im = res_im - acc_im;
}

double abs_gamma_sq(double t, double x) {
  if (!(t > 0.0)) throw ArgumentError("abs_gamma_sq: requires t > 0");
  double lr, li;
  log_gamma_complex(t, x, lr, li);
  return std::exp(2.0 * lr);
}

// ---------------------------------------------------------------------------
// Inverse-CDF tabulation

namespace {

// Cumulative Hermite cubic on [x0,x1] evaluated at x, given cell mass m and
// endpoint densities d0, d1 (Fritsch-Carlson clamped for monotonicity).
double hermite_cdf(double x0, double x1, double m, double d0, double d1,
                   double x) {
  const double h = x1 - x0;
  const double delta = m / h;
  if (delta <= 0.0) return 0.0;
  double a0 = d0 / delta, a1 = d1 / delta;
  const double s2 = a0 * a0 + a1 * a1;
  if (s2 > 9.0) {
    const double scale = 3.0 / std::sqrt(s2);
    a0 *= scale;
    a1 *= scale;
  }
  const double s = (x - x0) / h;
  const double c2 = 3.0 - 2.0 * a0 - a1;
  const double c3 = a0 + a1 - 2.0;
  return m * s * (a0 + s * (c2 + s * c3));
}

struct Cell {
  double x0, x1;
  double mass;
};

class CellBuilder {
 public:
  CellBuilder(const std::function<double(double)>& f, double tol)
      : f_(f), tol_(tol) {}

  void build(double x0, double x1, int depth) {
    const Interval q = qk15(f_, x0, x1);
    refine(x0, x1, q.value, q.error, depth);
  }

  std::vector<Cell> take() { return std::move(cells_); }
  std::size_t count() const { return cells_.size(); }

 private:
  void refine(double x0, double x1, double mass, double err, int depth) {
    if (cells_.size() > 60000) {
      throw TabulationError("tabulate_inverse_cdf: refinement budget exceeded");
    }
    const double mid = 0.5 * (x0 + x1);
    if (depth <= 0 || mid <= x0 || mid >= x1) {
      cells_.push_back({x0, x1, mass});
      return;
    }
    const Interval ql = qk15(f_, x0, mid);
    const Interval qr = qk15(f_, mid, x1);
    const double sum = ql.value + qr.value;
    // Node CDF errors accumulate across cells, so the quadrature tolerance is
    // proportional to cell mass (with a small absolute floor); the Hermite
    // consistency check only acts within a cell and gets an absolute budget.
    const double quad_tol = std::max(0.5 * tol_ * std::abs(sum), 1e-6 * tol_);
    const double hermite_mid = hermite_cdf(x0, x1, sum, f_(x0), f_(x1), mid);
    const bool quad_ok = std::abs(mass - sum) <= quad_tol && err <= 16.0 * quad_tol;
    const bool interp_ok = std::abs(hermite_mid - ql.value) <= 0.25 * tol_;
    if (quad_ok && interp_ok && ql.value >= 0.0 && qr.value >= 0.0) {
      cells_.push_back({x0, mid, ql.value});
      cells_.push_back({mid, x1, qr.value});
      return;
    }
    refine(x0, mid, ql.value, ql.error, depth - 1);
    refine(mid, x1, qr.value, qr.error, depth - 1);
  }

  const std::function<double(double)>& f_;
  double tol_;
  std::vector<Cell> cells_;
};

}  // namespace

InverseCdfTable tabulate_inverse_cdf(const std::function<double(double)>& density,
                                     double a, double b, double tol) {
  if (!(a < b) || std::isinf(a) || std::isinf(b)) {
    throw ArgumentError("tabulate_inverse_cdf: requires finite a < b");
  }
  if (!(tol > 0.0)) throw ArgumentError("tabulate_inverse_cdf: tol must be > 0");

  CellBuilder builder(density, tol);
  const int kInitialCells = 64;
  for (int i = 0; i < kInitialCells; ++i) {
    const double x0 = a + (b - a) * i / kInitialCells;
    const double x1 = a + (b - a) * (i + 1) / kInitialCells;
    builder.build(x0, x1, 48);
  }
  std::vector<Cell> cells = builder.take();

  double total = 0.0;
  for (const Cell& c : cells) total += c.mass;
  if (std::abs(total - 1.0) > tol) {
    throw TabulationError("tabulate_inverse_cdf: density mass " +
                          std::to_string(total) + " outside 1 +/- tol");
  }

  InverseCdfTable table;
  table.total_mass_ = total;
  table.x_.reserve(cells.size() + 1);
  table.cdf_.reserve(cells.size() + 1);
  table.pdf_.reserve(cells.size() + 1);
  table.x_.push_back(cells.front().x0);
  table.cdf_.push_back(0.0);
  table.pdf_.push_back(std::max(0.0, density(cells.front().x0)) / total);
  double run = 0.0;
  for (const Cell& c : cells) {
    run += std::max(0.0, c.mass);
    table.x_.push_back(c.x1);
    table.cdf_.push_back(std::min(1.0, run / total));
    table.pdf_.push_back(std::max(0.0, density(c.x1)) / total);
  }
  table.cdf_.back() = 1.0;
  return table;
}

double InverseCdfTable::cdf(double x) const {
  if (x <= x_.front()) return 0.0;
  if (x >= x_.back()) return 1.0;
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double m = cdf_[i + 1] - cdf_[i];
  return cdf_[i] + hermite_cdf(x_[i], x_[i + 1], m, pdf_[i], pdf_[i + 1], x);
}

double InverseCdfTable::sample(double u) const {
  u = std::min(std::max(u, 1e-16), 1.0 - 1e-16);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  i = (i == 0) ? 0 : i - 1;
  if (i >= x_.size() - 1) i = x_.size() - 2;
  const double x0 = x_[i], x1 = x_[i + 1];
  const double m = cdf_[i + 1] - cdf_[i];
  if (m <= 0.0) return 0.5 * (x0 + x1);
  const double target = u - cdf_[i];
  // Newton with bisection safeguard on the monotone cubic.
  double lo = x0, hi = x1;
  double x = x0 + (x1 - x0) * (target / m);
  for (int iter = 0; iter < 50; ++iter) {
    const double val = hermite_cdf(x0, x1, m, pdf_[i], pdf_[i + 1], x) - target;
    if (val > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    if (std::abs(val) < 1e-15 * std::max(m, 1e-300)) break;
    // derivative of the cubic (clamped slopes reproduced analytically)
    const double h = x1 - x0;
    const double delta = m / h;
    double a0 = pdf_[i] / delta, a1 = pdf_[i + 1] / delta;
    const double s2 = a0 * a0 + a1 * a1;
    if (s2 > 9.0) {
      const double scale = 3.0 / std::sqrt(s2);
      a0 *= scale;
      a1 *= scale;
    }
    const double s = (x - x0) / h;
    const double deriv =
        delta * (a0 + s * (2.0 * (3.0 - 2.0 * a0 - a1) + 3.0 * s * (a0 + a1 - 2.0)));
    double next = (deriv > 0.0) ? x - val / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-15 * (std::abs(x) + 1.0)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

}  // namespace bimeixner
