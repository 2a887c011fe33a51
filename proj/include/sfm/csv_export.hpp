#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "sfm/goodput.hpp"
#include "sfm/optimizer.hpp"
#include "sfm/oracle.hpp"
#include "sfm/simulator.hpp"

namespace sfm {

/// Shortest representation that round-trips.
std::string format_double(double v);

/// t, alpha_1..N, x, w, gamma_1..N, beta_1..N on a grid of step `sample_dt` plus every event time.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double sample_dt);
/// k, tau, kind, node, trigger, tau_prime_1..N. Node and trigger are 1-based / blank.
void write_events_csv(std::ostream& os, const std::vector<EventRecord>& events, std::size_t n_nodes);
/// t, dalpha{n}_dtheta{j}..., dx_dtheta{j}... on the same grid as the trajectory.
void write_derivatives_csv(std::ostream& os, const PathResult& path, double sample_dt);
/// seed, G, G_1..N, dG{n}_dtheta{j}..., dG_dtheta{j}..., degenerate
void write_gradient_csv(std::ostream& os, const std::vector<PathResult>& paths, std::size_t n_nodes);
/// seed, j, ipa, fd, rel_error, order_changed, degenerate, pass, events_checked, events_passed, max_event_error
void write_fd_csv(std::ostream& os, const FdReport& report);
/// point, theta_1..N, G_mean, G_stderr, paths
struct SweepPoint {
  std::vector<double> theta;
  double G_mean = 0.0;
  double G_stderr = 0.0;
  std::size_t paths = 0;
};
void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points, std::size_t n_nodes);
/// iter, theta_1..N, G_mean, G_stderr, grad_1..N
void write_optimize_csv(std::ostream& os, const std::vector<Iterate>& history, std::size_t n_nodes);

std::vector<double> sample_grid(const Trajectory& traj, double sample_dt);

}  // namespace sfm
