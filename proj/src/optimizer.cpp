#include "sfm/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "sfm/batch.hpp"
#include "sfm/errors.hpp"

namespace sfm {

double OptimizerConfig::step(std::size_t iteration) const {
  return step_size / (1.0 + static_cast<double>(iteration) / decay);
}

void validate(const OptimizerConfig& cfg) {
  if (!(cfg.step_size > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(cfg.decay > 0.0)) throw std::invalid_argument("step decay must be positive");
  if (cfg.paths_per_iteration < 1) throw std::invalid_argument("paths per iteration must be at least 1");
  if (cfg.max_iterations < 1) throw std::invalid_argument("max iterations must be at least 1");
  if (!(cfg.stop_grad_norm > 0.0)) throw std::invalid_argument("stopping threshold must be positive");
}

std::vector<std::uint64_t> iteration_seeds(std::uint64_t master, std::size_t iteration, std::size_t count) {
  std::vector<std::uint64_t> out(count);
  std::uint64_t state = splitmix64(master ^ (0x9E3779B97F4A7C15ULL * (iteration + 1)));
  for (std::size_t i = 0; i < count; ++i) {
    state = splitmix64(state + i);
    out[i] = state;
  }
  return out;
}

namespace {

double stderr_of(double sum, double sum_sq, std::size_t m) {
  if (m < 2) return 0.0;
  const double mean = sum / static_cast<double>(m);
  const double var = std::max(0.0, (sum_sq - static_cast<double>(m) * mean * mean) / static_cast<double>(m - 1));
  return std::sqrt(var / static_cast<double>(m));
}

}  // namespace

GradientEstimate gradient_estimate(const Scenario& s, std::span<const std::uint64_t> seeds, GradientMode mode,
                                   int jobs) {
  if (seeds.empty()) throw std::invalid_argument("gradient estimate needs at least one path");
  const std::size_t N = s.n_nodes;
  const std::vector<PathResult> paths = evaluate_paths(s, seeds, {}, jobs);
  GradientEstimate est;
  est.grad.assign(N, 0.0);
  est.grad_stderr.assign(N, 0.0);
  std::vector<double> sq(N, 0.0);
  double g_sum = 0.0;
  double g_sq = 0.0;
  for (const PathResult& p : paths) {
    if (p.degenerate) {
      ++est.degenerate_paths;
      continue;
    }
    ++est.used_paths;
    g_sum += p.G;
    g_sq += p.G * p.G;
    for (std::size_t j = 0; j < N; ++j) {
      const double v = mode == GradientMode::Global ? p.total_grad[j] : p.grad[j * N + j];
      est.grad[j] += v;
      sq[j] += v * v;
    }
  }
  if (est.used_paths == 0) throw SimulationError("every path in the gradient estimate is degenerate");
  for (std::size_t j = 0; j < N; ++j) {
    est.grad_stderr[j] = stderr_of(est.grad[j], sq[j], est.used_paths);
    est.grad[j] /= static_cast<double>(est.used_paths);
  }
  est.G_stderr = stderr_of(g_sum, g_sq, est.used_paths);
  est.G_mean = g_sum / static_cast<double>(est.used_paths);
  return est;
}

std::vector<Iterate> optimize(const Scenario& s, const OptimizerConfig& cfg) {
  validate(cfg);
  Scenario cur = s;
  std::vector<Iterate> hist;
  for (std::size_t i = 0;; ++i) {
    const auto seeds = iteration_seeds(cfg.master_seed, i, cfg.paths_per_iteration);
    Iterate it;
    it.iteration = i;
    it.theta = cur.thetas;
    it.estimate = gradient_estimate(cur, seeds, cfg.mode, cfg.jobs);
    double norm = 0.0;
    for (double g : it.estimate.grad) norm += g * g;
    it.grad_norm = std::sqrt(norm);
    hist.push_back(it);
    if (it.grad_norm < cfg.stop_grad_norm || i + 1 >= cfg.max_iterations) break;
    const double eta = cfg.step(i);
    for (std::size_t j = 0; j < cur.n_nodes; ++j) {
      cur.thetas[j] = std::max(0.0, cur.thetas[j] + eta * it.estimate.grad[j]);
    }
  }
  return hist;
}

}  // namespace sfm
