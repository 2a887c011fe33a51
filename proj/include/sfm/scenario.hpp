#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "sfm/signal.hpp"

namespace sfm {

enum class ProcessKind { Constant, Markov, Schedule };

/// Generator for one exogenous rate process (lambda_n or B).
///
/// - Constant: `levels` holds the single value.
/// - Markov: continuous-time chain over `levels`, leaving each level at
///   `jump_rate`, moving to one of the other levels uniformly; starts at
///   `initial_level`.
/// - Schedule: value `values[i]` on [times[i-1], times[i]); times[-1] = 0.
struct ProcessSpec {
  ProcessKind kind = ProcessKind::Constant;
  std::vector<double> levels;
  double jump_rate = 0.0;
  std::size_t initial_level = 0;
  std::vector<double> times;
  std::vector<double> values;

  static ProcessSpec constant(double v);
  static ProcessSpec markov(std::vector<double> levels, double jump_rate, std::size_t initial_level = 0);
  static ProcessSpec schedule(std::vector<double> times, std::vector<double> values);

  double min_value() const;
};

struct PolicyParams {
  std::vector<double> ramp_rates;  // r_n, rate per unit time while w <= theta_n
  std::vector<double> alpha_min;   // rate held while w > theta_n
};

struct InitialConditions {
  std::vector<double> alpha0;
  double w0 = 0.0;
  /// Constant transmission rates on the prehistory; defaults to alpha0.
  std::vector<double> prehistory_alpha;
  /// Buffer content at t = 0. FCFS consistency forces x0 = w0 * sum(prehistory_alpha);
  /// NaN means "derive it".
  double x0 = std::numeric_limits<double>::quiet_NaN();
};

struct NumericsSettings {
  double event_tol_rel = 1e-9;   // tie window, relative to the horizon
  double root_tol_rel = 1e-14;   // bisection bracket width, relative to the horizon
  std::size_t scan_steps = 10000;  // root-isolation scan step is horizon / scan_steps
};

struct Scenario {
  std::size_t n_nodes = 1;
  double horizon = 0.0;
  std::vector<double> thetas;
  PolicyParams policy;
  std::vector<ProcessSpec> lambda_specs;
  ProcessSpec b_spec;
  InitialConditions init;
  std::uint64_t seed = 0;
  NumericsSettings numerics;

  double theta_max() const;
  /// Length of the constant prehistory kept before t = 0.
  double prehistory_length() const;
};

/// Throws ScenarioError naming the first violated invariant. Fills defaults
/// (prehistory rates and x0) when they were left empty / derived.
void validate(Scenario& s);

Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
Scenario load_scenario(const std::filesystem::path& path);
std::string to_yaml(const Scenario& s);

struct ExogenousJump {
  double time;
  bool is_service;    // B jump when true, lambda_{node} jump otherwise
  std::size_t node;
};

struct Realization {
  std::vector<PiecewiseSignal> lambda;
  PiecewiseSignal service;
  std::vector<ExogenousJump> jumps;  // sorted by time, then B before lambda, then node
};

/// Stream seed for process `index` (lambda_n -> n, B -> N).
std::uint64_t process_stream_seed(std::uint64_t seed, std::size_t index);
std::uint64_t splitmix64(std::uint64_t x);

/// Pure function of (scenario, seed): identical inputs give bit-identical paths.
Realization realize_processes(const Scenario& s, std::uint64_t seed);

/// Jump times and post-jump values of one process on (0, horizon).
struct ProcessPath {
  double initial = 0.0;
  std::vector<double> times;
  std::vector<double> values;
};
ProcessPath generate_process(const ProcessSpec& spec, double horizon, std::uint64_t stream_seed);

}  // namespace sfm
