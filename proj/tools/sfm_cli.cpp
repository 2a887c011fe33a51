// Command-line front end: simulate, gradient, check-fd, sweep, optimize.
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sfm/batch.hpp"
#include "sfm/csv_export.hpp"
#include "sfm/errors.hpp"
#include "sfm/goodput.hpp"
#include "sfm/optimizer.hpp"
#include "sfm/oracle.hpp"
#include "sfm/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kOracleFailure = 2;
constexpr int kSimulationError = 3;

struct Common {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::size_t seeds = 1;
  std::string out = ".";
  int jobs = 0;
};

std::uint64_t resolve_seed(const Common& c, const sfm::Scenario& s) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("SFM_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw sfm::ScenarioError(std::string("SFM_SEED is not an unsigned integer: ") + env);
    }
  }
  return s.seed;
}

std::ofstream open_out(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  const fs::path p = fs::path(c.out) / name;
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

void add_common(CLI::App* cmd, Common& c, std::size_t default_seeds) {
  c.seeds = default_seeds;
  cmd->add_option("--scenario", c.scenario, "Scenario file (YAML)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "First seed (default: SFM_SEED, then the scenario seed)");
  cmd->add_option("--seeds", c.seeds, "Number of consecutive seeds")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--jobs", c.jobs, "Worker threads for independent paths (0 = default)")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Timeout-controlled stochastic flow model: simulation and gradient estimation"};
  app.require_subcommand(1);

  Common sim_c, grad_c, fd_c, sweep_c, opt_c;
  double sample_dt = 0.0;
  double delta = 1e-4;
  double tol = 2e-2;
  std::size_t sweep_node = 0;
  double sweep_lo = 0.0, sweep_hi = 5.0;
  std::size_t sweep_points = 11;
  std::string mode = "global";
  sfm::OptimizerConfig ocfg;

  auto* sim = app.add_subcommand("simulate", "Write trajectory.csv, events.csv and derivatives.csv for one seed");
  add_common(sim, sim_c, 1);
  sim->add_option("--sample-dt", sample_dt, "Sampling step of the trajectory grid (default horizon/1000)");

  auto* grad = app.add_subcommand("gradient", "Write gradient.csv over consecutive seeds");
  add_common(grad, grad_c, 1);

  auto* fd = app.add_subcommand("check-fd", "Compare IPA gradients with common-random-number finite differences");
  add_common(fd, fd_c, 20);
  fd->add_option("--delta", delta, "Relative step: delta_j = delta * max(theta_j, 1)")->check(CLI::PositiveNumber);
  fd->add_option("--tol", tol, "Relative tolerance")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "Mean goodput over a grid of thresholds");
  add_common(sweep, sweep_c, 20);
  sweep->add_option("--node", sweep_node, "Node to sweep (1-based); 0 sweeps all thresholds together");
  sweep->add_option("--theta-min", sweep_lo, "Lowest threshold")->check(CLI::NonNegativeNumber);
  sweep->add_option("--theta-max", sweep_hi, "Highest threshold")->check(CLI::NonNegativeNumber);
  sweep->add_option("--points", sweep_points, "Grid points")->check(CLI::PositiveNumber);

  auto* opt = app.add_subcommand("optimize", "Projected stochastic gradient ascent on the thresholds");
  add_common(opt, opt_c, 20);
  opt->add_option("--mode", mode, "global | local")->check(CLI::IsMember({"global", "local"}));
  opt->add_option("--step", ocfg.step_size, "Initial step size")->check(CLI::PositiveNumber);
  opt->add_option("--decay", ocfg.decay, "Step decay constant")->check(CLI::PositiveNumber);
  opt->add_option("--iterations", ocfg.max_iterations, "Maximum iterations")->check(CLI::PositiveNumber);
  opt->add_option("--stop", ocfg.stop_grad_norm, "Stop when the gradient norm falls below this")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) {
      const sfm::Scenario s = sfm::load_scenario(sim_c.scenario);
      const std::uint64_t seed = resolve_seed(sim_c, s);
      sfm::EvalOptions eo;
      eo.keep_trajectory = true;
      const sfm::PathResult p = sfm::evaluate_path(s, seed, eo);
      const double dt = sample_dt > 0.0 ? sample_dt : s.horizon / 1000.0;
      auto t = open_out(sim_c, "trajectory.csv");
      sfm::write_trajectory_csv(t, *p.trajectory, dt);
      auto e = open_out(sim_c, "events.csv");
      sfm::write_events_csv(e, p.events, s.n_nodes);
      auto d = open_out(sim_c, "derivatives.csv");
      sfm::write_derivatives_csv(d, p, dt);
      std::cout << "seed " << seed << ": " << p.events.size() << " events, G = " << sfm::format_double(p.G) << "\n";
      return kOk;
    }
    if (*grad) {
      const sfm::Scenario s = sfm::load_scenario(grad_c.scenario);
      const auto seeds = sfm::seed_range(resolve_seed(grad_c, s), grad_c.seeds);
      const auto paths = sfm::evaluate_paths(s, seeds, {}, grad_c.jobs);
      auto os = open_out(grad_c, "gradient.csv");
      sfm::write_gradient_csv(os, paths, s.n_nodes);
      std::size_t degenerate = 0;
      for (const auto& p : paths) degenerate += p.degenerate ? 1 : 0;
      std::cout << paths.size() << " paths, " << degenerate << " degenerate\n";
      return kOk;
    }
    if (*fd) {
      const sfm::Scenario s = sfm::load_scenario(fd_c.scenario);
      const auto seeds = sfm::seed_range(resolve_seed(fd_c, s), fd_c.seeds);
      const sfm::FdReport rep = sfm::compare_ipa_fd(s, seeds, delta, tol, fd_c.jobs);
      auto os = open_out(fd_c, "fd_report.csv");
      sfm::write_fd_csv(os, rep);
      std::cout << sfm::summarize(rep);
      return rep.passed() ? kOk : kOracleFailure;
    }
    if (*sweep) {
      sfm::Scenario s = sfm::load_scenario(sweep_c.scenario);
      if (sweep_node > s.n_nodes) throw sfm::ScenarioError("--node exceeds the node count");
      if (sweep_hi < sweep_lo) throw sfm::ScenarioError("--theta-max is below --theta-min");
      const auto seeds = sfm::seed_range(resolve_seed(sweep_c, s), sweep_c.seeds);
      std::vector<sfm::SweepPoint> points;
      for (std::size_t i = 0; i < sweep_points; ++i) {
        const double th = sweep_points == 1 ? sweep_lo
                                            : sweep_lo + (sweep_hi - sweep_lo) * static_cast<double>(i) /
                                                             static_cast<double>(sweep_points - 1);
        for (std::size_t n = 0; n < s.n_nodes; ++n) {
          if (sweep_node == 0 || sweep_node == n + 1) s.thetas[n] = th;
        }
        const auto est = sfm::gradient_estimate(s, seeds, sfm::GradientMode::Global, sweep_c.jobs);
        points.push_back({s.thetas, est.G_mean, est.G_stderr, est.used_paths});
      }
      auto os = open_out(sweep_c, "sweep.csv");
      sfm::write_sweep_csv(os, points, s.n_nodes);
      return kOk;
    }
    if (*opt) {
      const sfm::Scenario s = sfm::load_scenario(opt_c.scenario);
      ocfg.mode = mode == "local" ? sfm::GradientMode::Local : sfm::GradientMode::Global;
      ocfg.paths_per_iteration = opt_c.seeds;
      ocfg.master_seed = resolve_seed(opt_c, s);
      ocfg.jobs = opt_c.jobs;
      const auto hist = sfm::optimize(s, ocfg);
      auto os = open_out(opt_c, "optimize.csv");
      sfm::write_optimize_csv(os, hist, s.n_nodes);
      const auto& last = hist.back();
      std::cout << hist.size() << " iterations, G_mean = " << sfm::format_double(last.estimate.G_mean)
                << ", |grad| = " << sfm::format_double(last.grad_norm) << "\n";
      return kOk;
    }
  } catch (const sfm::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return kSimulationError;
  }
  return kUsage;
}
