#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bimeixner/randomization.hpp"

namespace bimeixner {

// Strictly increasing positive times; t = 0 is disallowed (processes start
// at 0 by convention, and Z_0 = 0 is the pre-branch limit).
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  bool contains_one() const { return contains_one_; }

  // Index of t on the grid; throws GridError if absent.
  std::size_t index_of(double t) const;

 private:
  std::vector<double> times_;
  bool contains_one_ = false;
};

enum class TimeMapSide { pre, post };

// Deterministic reparametrizations used by the stitching construction:
// pre:  t in (0,1)   ->  r t / (1 - t)   (increasing bijection onto (0,inf))
// post: t in (1,inf) ->  r / (t - 1)     (decreasing bijection onto (0,inf))
double time_map(double t, double r, TimeMapSide side);

// Stitching configuration: randomization law plus the derived mean
// m = p/r and scale v = sqrt(var(kappa'(Theta))).  Construction verifies the
// boundary-decay assumptions at the default support points.
struct StitchConfig {
  RandomizationLaw law;
  double m;
  double v;
};

StitchConfig make_stitch_config(const FamilySpec& family, double p, double r);

enum class ProcessTag { Y, Z };

// A batch of sampled trajectories on a fixed grid.  Row i of `values` is the
// path generated conditionally on thetas[i]; the batch is a deterministic
// function of (seed, law/config, grid, n_paths) regardless of thread count.
//
// For the stitched process the conditionally independent ingredient paths
// are retained: y_pre holds Y at the pre-mapped times, y_post holds Y' at the
// post-mapped times (both ascending in mapped time).
struct PathBatch {
  TimeGrid grid;
  FamilySpec family;
  double p = 0.0;
  double r = 0.0;
  Eigen::MatrixXd values;   // n_paths x grid.size()
  Eigen::VectorXd thetas;   // n_paths
  std::uint64_t seed = 0;
  ProcessTag tag = ProcessTag::Y;

  std::vector<double> pre_mapped_times;   // ascending
  std::vector<double> post_mapped_times;  // ascending
  Eigen::MatrixXd y_pre;
  Eigen::MatrixXd y_post;

  int n_paths() const { return static_cast<int>(values.rows()); }
};

// Randomized process Y: per path draw Theta from h, then accumulate
// independent tilted increments over the grid.
PathBatch simulate_y(const RandomizationLaw& law, const TimeGrid& grid,
                     int n_paths, std::uint64_t seed, int threads = 0);

// Stitched process Z of the construction: pre-1 points from a Y path at
// pre-mapped times, the t = 1 value (kappa'(Theta) - p/r)/v, post-1 points
// from an independent Y' path (same Theta) at post-mapped times.
PathBatch simulate_z(const StitchConfig& config, const TimeGrid& grid,
                     int n_paths, std::uint64_t seed, int threads = 0);

}  // namespace bimeixner
