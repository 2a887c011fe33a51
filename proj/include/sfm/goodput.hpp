#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sfm/ipa.hpp"
#include "sfm/scenario.hpp"
#include "sfm/simulator.hpp"

namespace sfm {

/// Boundary values of one event for the gradient accumulation.
struct EventTerms {
  std::vector<double> tau_prime;
  std::vector<double> alpha_left;    // alpha_n(tau-)
  std::vector<double> alpha_right;   // alpha_n(tau+)
  std::vector<bool> top_before;      // node in timeout on the interval ending at tau
  std::vector<bool> top_after;       // node in timeout on the interval starting at tau
  std::vector<double> delayed_left;  // alpha_n((tau - theta_n)-)
  std::vector<double> delayed_right; // alpha_n((tau - theta_n)+)
};

struct GoodputResult {
  double G = 0.0;
  std::vector<double> G_n;
  std::vector<double> grad;        // row-major, (n, j) = dG_n / d theta_j
  std::vector<double> total_grad;  // dG / d theta_j
};

class GoodputAccumulator {
 public:
  explicit GoodputAccumulator(std::size_t n_nodes);

  /// Interval [t0, t1] with index k; `in_timeout[n]` marks membership in the timeout set of n.
  void accumulate_interval(std::size_t k, double t0, double t1, const Trajectory& traj, const IpaTracker& ipa,
                           const std::vector<bool>& in_timeout);
  void accumulate_event_terms(const EventTerms& e);
  GoodputResult finalize() const;

  double grad(std::size_t n, std::size_t j) const { return grad_[n * n_ + j]; }
  const std::vector<double>& G_n() const { return G_n_; }
  /// Interval indices spent in timeout, per node.
  const std::vector<std::vector<std::size_t>>& omega() const { return omega_; }

 private:
  std::size_t n_;
  std::vector<double> G_n_;
  std::vector<double> grad_;
  std::vector<std::vector<std::size_t>> omega_;
};

struct EvalOptions {
  bool keep_trajectory = false;
  bool trim_history = false;
};

struct PathResult {
  std::uint64_t seed = 0;
  double G = 0.0;
  std::vector<double> G_n;
  std::vector<double> grad;
  std::vector<double> total_grad;
  bool degenerate = false;
  std::size_t degenerate_count = 0;
  double w_max = 0.0;
  std::vector<EventRecord> events;
  std::optional<Trajectory> trajectory;
  /// Derivative histories, kept with the trajectory.
  std::vector<PiecewiseSignal> alpha_prime;  // row-major (n, j)
  std::vector<PiecewiseSignal> x_prime;
};

/// Simulates one path and propagates every derivative along it.
PathResult evaluate_path(const Scenario& s, std::uint64_t seed, const EvalOptions& opt = {});

}  // namespace sfm
