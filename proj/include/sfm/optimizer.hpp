#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sfm/scenario.hpp"

namespace sfm {

enum class GradientMode { Global, Local };

struct OptimizerConfig {
  double step_size = 0.1;     // eta_0
  double decay = 50.0;        // eta_i = eta_0 / (1 + i / decay)
  std::size_t paths_per_iteration = 20;
  std::size_t max_iterations = 200;
  double stop_grad_norm = 1e-6;
  GradientMode mode = GradientMode::Global;
  std::uint64_t master_seed = 1;
  int jobs = 0;

  double step(std::size_t iteration) const;
};

void validate(const OptimizerConfig& cfg);

struct GradientEstimate {
  std::vector<double> grad;         // mean over non-degenerate paths
  std::vector<double> grad_stderr;
  double G_mean = 0.0;
  double G_stderr = 0.0;
  std::size_t used_paths = 0;
  std::size_t degenerate_paths = 0;
};

/// Global mode averages dG/dtheta_j; local mode averages dG_j/dtheta_j.
/// Throws SimulationError when every path is degenerate.
GradientEstimate gradient_estimate(const Scenario& s, std::span<const std::uint64_t> seeds, GradientMode mode,
                                   int jobs = 0);

struct Iterate {
  std::size_t iteration = 0;
  std::vector<double> theta;
  GradientEstimate estimate;
  double grad_norm = 0.0;
};

/// Projected ascent theta <- max(0, theta + eta_i g). Every iteration draws
/// fresh seeds from the master stream; the last entry is the iterate at which
/// the loop stopped.
std::vector<Iterate> optimize(const Scenario& s, const OptimizerConfig& cfg);

/// Seeds of iteration i: a pure function of (master seed, i).
std::vector<std::uint64_t> iteration_seeds(std::uint64_t master, std::size_t iteration, std::size_t count);

}  // namespace sfm
