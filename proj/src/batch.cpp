#include "sfm/batch.hpp"

#include <exception>

#ifdef SFM_HAVE_OPENMP
#include <omp.h>
#endif

namespace sfm {

std::vector<PathResult> evaluate_paths_serial(const Scenario& s, std::span<const std::uint64_t> seeds,
                                              const EvalOptions& opt) {
  std::vector<PathResult> out;
  out.reserve(seeds.size());
  for (std::uint64_t seed : seeds) out.push_back(evaluate_path(s, seed, opt));
  return out;
}

std::vector<PathResult> evaluate_paths_parallel(const Scenario& s, std::span<const std::uint64_t> seeds,
                                                const EvalOptions& opt, int jobs) {
#ifdef SFM_HAVE_OPENMP
  std::vector<PathResult> out(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  const auto n = static_cast<std::ptrdiff_t>(seeds.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = evaluate_path(s, seeds[static_cast<std::size_t>(i)], opt);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
#else
  (void)jobs;
  return evaluate_paths_serial(s, seeds, opt);
#endif
}

std::vector<PathResult> evaluate_paths(const Scenario& s, std::span<const std::uint64_t> seeds,
                                       const EvalOptions& opt, int jobs) {
  if (jobs == 1 || seeds.size() < 2) return evaluate_paths_serial(s, seeds, opt);
  return evaluate_paths_parallel(s, seeds, opt, jobs);
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = first + i;
  return out;
}

}  // namespace sfm
