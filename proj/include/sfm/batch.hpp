#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sfm/goodput.hpp"
#include "sfm/scenario.hpp"

namespace sfm {

/// Reference implementation: one path after another on the calling thread.
std::vector<PathResult> evaluate_paths_serial(const Scenario& s, std::span<const std::uint64_t> seeds,
                                              const EvalOptions& opt = {});

/// OpenMP over seeds. Results are stored by seed position, so the output is
/// identical to the serial version for any thread count. The first exception
/// thrown by any path is rethrown after the loop.
std::vector<PathResult> evaluate_paths_parallel(const Scenario& s, std::span<const std::uint64_t> seeds,
                                                const EvalOptions& opt = {}, int jobs = 0);

/// jobs == 1 runs serially; jobs == 0 uses the OpenMP default.
std::vector<PathResult> evaluate_paths(const Scenario& s, std::span<const std::uint64_t> seeds,
                                       const EvalOptions& opt = {}, int jobs = 0);

/// `count` consecutive seeds starting at `first`.
std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count);

}  // namespace sfm
