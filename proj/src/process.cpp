#include "bimeixner/process.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "bimeixner/errors.hpp"

namespace bimeixner {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw ArgumentError("TimeGrid: empty grid");
  double prev = 0.0;
  for (double t : times_) {
    if (!(t > prev)) {
      throw ArgumentError("TimeGrid: times must be strictly increasing and > 0");
    }
    if (t == 1.0) contains_one_ = true;
    prev = t;
  }
}

std::size_t TimeGrid::index_of(double t) const {
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.end() || *it != t) {
    throw GridError("time " + std::to_string(t) + " is not on the grid");
  }
  return static_cast<std::size_t>(it - times_.begin());
}

double time_map(double t, double r, TimeMapSide side) {
  if (!(r > 0.0)) throw ArgumentError("time_map: r must be > 0");
  if (side == TimeMapSide::pre) {
    if (!(t > 0.0 && t < 1.0)) {
      throw ArgumentError("time_map(pre): requires 0 < t < 1");
    }
    return r * t / (1.0 - t);
  }
  if (!(t > 1.0)) throw ArgumentError("time_map(post): requires t > 1");
  return r / (t - 1.0);
}

StitchConfig make_stitch_config(const FamilySpec& family, double p, double r) {
  RandomizationLaw law = make_randomization_law(family, p, r);
  const KPrimeMoments moments = kprime_moments(law);
  if (!(moments.variance > 0.0)) {
    throw ArgumentError("stitching requires var(kappa'(Theta)) > 0");
  }
  const AssumptionReport assumptions =
      check_assumptions(family, p, r, default_support_points(family));
  if (!assumptions.pass) {
    throw ArgumentError("boundary-decay assumptions fail for (p, r) = (" +
                        std::to_string(p) + ", " + std::to_string(r) + ")");
  }
  return {std::move(law), moments.mean, std::sqrt(moments.variance)};
}

namespace {

int resolve_threads(int threads, int n_paths) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  return std::max(1, std::min(threads, n_paths));
}

// Runs fn(path_index) over path ranges on `threads` workers.  Streams are
// derived per path, so the partition does not affect the result.
template <typename Fn>
void parallel_paths(int n_paths, int threads, const Fn& fn) {
  threads = resolve_threads(threads, n_paths);
  if (threads == 1) {
    for (int i = 0; i < n_paths; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(threads);
  const int chunk = (n_paths + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(n_paths, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &fn]() {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (std::thread& worker : workers) worker.join();
}

// Cumulative tilted path at strictly increasing positive times.
void fill_levy_path(const FamilySpec& family, double theta,
                    const std::vector<double>& times, RandomStream& rng,
                    double* out) {
  double level = 0.0;
  double prev = 0.0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    level += increment_sample(family, theta, times[j] - prev, rng);
    prev = times[j];
    out[j] = level;
  }
}

}  // namespace

PathBatch simulate_y(const RandomizationLaw& law, const TimeGrid& grid,
                     int n_paths, std::uint64_t seed, int threads) {
  if (n_paths < 1) throw ArgumentError("simulate_y: n_paths must be >= 1");
  PathBatch batch{grid, law.family, law.p, law.r,
                  Eigen::MatrixXd(n_paths, grid.size()),
                  Eigen::VectorXd(n_paths), seed, ProcessTag::Y,
                  {}, {}, {}, {}};
  const std::vector<double>& times = grid.times();
  parallel_paths(n_paths, threads, [&](int i) {
    RandomStream rng(seed, static_cast<std::uint64_t>(i));
    const double theta = sample_theta(law, rng);
    batch.thetas[i] = theta;
    std::vector<double> row(times.size());
    fill_levy_path(law.family, theta, times, rng, row.data());
    for (std::size_t j = 0; j < times.size(); ++j) batch.values(i, j) = row[j];
  });
  return batch;
}

PathBatch simulate_z(const StitchConfig& config, const TimeGrid& grid,
                     int n_paths, std::uint64_t seed, int threads) {
  if (n_paths < 1) throw ArgumentError("simulate_z: n_paths must be >= 1");
  if (!(config.v > 0.0)) throw ArgumentError("simulate_z: v must be > 0");
  const RandomizationLaw& law = config.law;
  const double p = law.p, r = law.r, v = config.v, m = config.m;

  // Grid split: pre-1 times map increasingly, post-1 times map decreasingly;
  // Y' is simulated in ascending mapped order (descending t) to preserve its
  // increment structure, then values are assigned back to grid slots.
  std::vector<std::size_t> pre_idx, post_idx;
  std::ptrdiff_t one_idx = -1;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid[j] < 1.0) {
      pre_idx.push_back(j);
    } else if (grid[j] == 1.0) {
      one_idx = static_cast<std::ptrdiff_t>(j);
    } else {
      post_idx.push_back(j);
    }
  }
  std::vector<double> pre_times(pre_idx.size());
  for (std::size_t k = 0; k < pre_idx.size(); ++k) {
    pre_times[k] = time_map(grid[pre_idx[k]], r, TimeMapSide::pre);
  }
  // post grid slots in descending t <=> ascending mapped time
  std::vector<std::size_t> post_slots(post_idx.rbegin(), post_idx.rend());
  std::vector<double> post_times(post_slots.size());
  for (std::size_t k = 0; k < post_slots.size(); ++k) {
    post_times[k] = time_map(grid[post_slots[k]], r, TimeMapSide::post);
  }

  PathBatch batch{grid, law.family, p, r,
                  Eigen::MatrixXd(n_paths, grid.size()),
                  Eigen::VectorXd(n_paths), seed, ProcessTag::Z,
                  pre_times, post_times,
                  Eigen::MatrixXd(n_paths, pre_times.size()),
                  Eigen::MatrixXd(n_paths, post_times.size())};

  const double rv = r * v;
  parallel_paths(n_paths, threads, [&](int i) {
    RandomStream rng(seed, static_cast<std::uint64_t>(i));
    const double theta = sample_theta(law, rng);
    batch.thetas[i] = theta;

    std::vector<double> y(pre_times.size());
    fill_levy_path(law.family, theta, pre_times, rng, y.data());
    for (std::size_t k = 0; k < pre_idx.size(); ++k) {
      const double t = grid[pre_idx[k]];
      batch.y_pre(i, k) = y[k];
      batch.values(i, pre_idx[k]) = (1.0 - t) / rv * y[k] - t * p / rv;
    }
    if (one_idx >= 0) {
      const double kprime = cumulants(law.family, theta).kappa_prime;
      batch.values(i, one_idx) = (kprime - m) / v;
    }
    std::vector<double> yp(post_times.size());
    fill_levy_path(law.family, theta, post_times, rng, yp.data());
    for (std::size_t k = 0; k < post_slots.size(); ++k) {
      const double t = grid[post_slots[k]];
      batch.y_post(i, k) = yp[k];
      batch.values(i, post_slots[k]) = (t - 1.0) / rv * yp[k] - p / rv;
    }
  });
  return batch;
}

}  // namespace bimeixner
