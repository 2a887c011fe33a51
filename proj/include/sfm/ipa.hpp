#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sfm/scenario.hpp"
#include "sfm/signal.hpp"
#include "sfm/simulator.hpp"

namespace sfm {

/// Derivative state along one path. alpha_prime is row-major N x N,
/// entry (n, j) = d alpha_n / d theta_j; x_prime_j = d x / d theta_j.
struct IpaState {
  std::size_t n_nodes = 0;
  std::vector<double> alpha_prime;
  std::vector<double> x_prime;

  explicit IpaState(std::size_t n = 0) : n_nodes(n), alpha_prime(n * n, 0.0), x_prime(n, 0.0) {}
  double& ap(std::size_t n, std::size_t j) { return alpha_prime[n * n_nodes + j]; }
  double ap(std::size_t n, std::size_t j) const { return alpha_prime[n * n_nodes + j]; }
  /// sum_n d alpha_n / d theta_j
  double column_sum(std::size_t j) const;
};

struct EventDerivative {
  std::vector<double> tau_prime;
};

/// w'_j = x~'_j / alpha~.
std::vector<double> waiting_time_derivative(std::span<const double> x_prime_delayed, double alpha_tilde_total);

/// Left-limit quantities an event-time derivative may need. Unused fields are ignored.
struct EventContext {
  double alpha_total = 0.0;        // sum alpha(tau-)
  double alpha_dot_total = 0.0;    // sum d alpha / dt (tau-)
  double service = 0.0;            // B(tau-)
  double alpha_tilde_total = 0.0;  // alpha~(tau-)
  std::vector<double> x_tilde_prime;  // d x(tau - w) / d theta, left limit
  bool exogenous_cause = false;
  // Triggering record of an induced event.
  std::vector<double> trigger_tau_prime;
  // Left limits at tau_m, per parameter j. They differ by j only when tau_m is
  // shared by several timeout starts: perturbing theta_j orders such a group by tau'_j.
  std::vector<double> trigger_x_prime;      // d x(tau_m-) / d theta_j
  std::vector<double> trigger_alpha_total;  // sum alpha(tau_m-)
};

/// Throws DegenerateEvent when the denominator is below 1e-12 * B.
EventDerivative event_time_derivative(const EventRecord& ev, const IpaState& ipa, const EventContext& ctx);

/// `delta_alpha` is alpha_n(tau-) - alpha_n(tau+) for a timeout start; ignored otherwise.
void apply_state_jump(const EventRecord& ev, IpaState& ipa, const EventDerivative& d, double delta_alpha,
                      const PolicyParams& policy);

struct FlowDerivatives {
  std::vector<double> alpha_prime_dot;  // always zero
  std::vector<double> x_prime_dot;
};

FlowDerivatives flow_derivatives(const IpaState& ipa, BufferMode mode);

/// d alpha_n(t - theta_n) / d theta_j from the delayed derivative and the delayed mode.
double delayed_alpha_derivative(std::size_t n, std::size_t j, double alpha_prime_delayed, double ramp_rate,
                                bool normal_at_delayed_time);

/// Owns the derivative state and its histories: alpha' (piecewise constant)
/// and x' (piecewise linear), both zero on the prehistory.
class IpaTracker {
 public:
  IpaTracker(std::size_t n_nodes, double prehistory_start);

  IpaState& state() { return st_; }
  const IpaState& state() const { return st_; }
  double now() const { return now_; }

  /// Records the flow segment [now, t1] under `mode` and advances the state to t1-.
  void commit_flow(double t1, BufferMode mode);

  /// d x(u-) / d theta_j for u <= now.
  std::vector<double> x_prime_left(double u) const;
  /// integral of alpha'_{n,j} over [a, b].
  double alpha_prime_integral(std::size_t n, std::size_t j, double a, double b) const;
  double alpha_prime_at(std::size_t n, std::size_t j, double u) const;

  const PiecewiseSignal& alpha_prime_history(std::size_t n, std::size_t j) const {
    return ap_hist_[n * st_.n_nodes + j].signal();
  }
  const PiecewiseSignal& x_prime_history(std::size_t j) const { return xp_hist_[j].signal(); }

  void set_retention(double theta_max, double w_max);
  void trim();

 private:
  IpaState st_;
  double now_ = 0.0;
  std::vector<HistoryWindow> ap_hist_;
  std::vector<HistoryWindow> xp_hist_;
};

}  // namespace sfm
