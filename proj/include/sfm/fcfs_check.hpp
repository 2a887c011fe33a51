#pragma once

#include <cstddef>
#include <vector>

#include "sfm/scenario.hpp"
#include "sfm/simulator.hpp"

namespace sfm {

/// Per-class verification pass over a recorded path.
///
/// Each class buffer x_n is integrated from its own rates (alpha_n in,
/// beta_n out) and its waiting time w_n(t) solves
/// integral_{t - w_n}^{t} alpha_n = x_n(t).
class ClassBuffers {
 public:
  ClassBuffers(const Trajectory& traj, const Scenario& s, std::size_t substeps_per_horizon = 20000);

  double content(std::size_t n, double t) const;
  double waiting_time(std::size_t n, double t) const;

 private:
  const Trajectory& traj_;
  std::vector<double> grid_;
  std::vector<std::vector<double>> x_;  // x_n at each grid point
  double w0_;
};

struct FcfsReport {
  double max_wait_error = 0.0;    // max |w_n - w| over samples and classes
  double max_share_error = 0.0;   // max |sum beta - B| / B
  double min_head_increment = 0.0;  // min over consecutive checks of the head-arrival increment
  std::size_t samples = 0;
};

/// Samples `n_samples` uniform times plus all event times and NEP midpoints.
FcfsReport check_fcfs(const Trajectory& traj, const Scenario& s, std::size_t n_samples = 1000);

}  // namespace sfm
