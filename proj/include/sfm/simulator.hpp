#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfm/scenario.hpp"
#include "sfm/signal.hpp"

namespace sfm {

enum class EventKind {
  Start,             // tau_0 = 0 sentinel
  LambdaJump,        // E_lambda
  ServiceJump,       // E_B
  BufferNonEmpty,    // [x > 0]
  BufferEmpty,       // [x = 0]
  TimeoutStart,      // [w > theta_n]
  TimeoutEnd,        // [w <= theta_n]
  AvailabilityJump,  // [alpha~_n+ != alpha~_n-], drain timer h1 expired
  FeedbackJump,      // [gamma_n+ != gamma_n-], delay timer h2 expired
  End,               // tau_{K+1} = T sentinel
};

const char* to_string(EventKind k);
bool is_exogenous(EventKind k);
bool is_induced(EventKind k);
/// Tie-break class: exogenous < endogenous < induced.
int priority(EventKind k);

enum class NodeMode : std::uint8_t { Normal, Timeout };
enum class BufferMode : std::uint8_t { Empty, NonEmpty };

struct SystemState {
  double t = 0.0;
  std::vector<double> alpha;
  double x = 0.0;
  double w = 0.0;
  std::vector<NodeMode> node_mode;
  BufferMode buffer_mode = BufferMode::Empty;

  double alpha_total() const;
  bool in_timeout(std::size_t n) const { return node_mode[n] == NodeMode::Timeout; }
  bool non_empty() const { return buffer_mode == BufferMode::NonEmpty; }
};

struct EventRecord {
  std::size_t k = 0;
  double tau = 0.0;
  EventKind kind = EventKind::Start;
  std::optional<std::size_t> node;     // 0-based
  std::optional<std::size_t> trigger;  // index k of the triggering record (induced events)
  std::vector<double> tau_prime;       // d tau_k / d theta_j, filled by the IPA pass
  bool exogenous_cause = false;        // endogenous transition forced by an exogenous jump at tau
};

enum class TimerKind { Drain, Delay };  // h1: drains x(tau_m) at rate B; h2: counts down theta_n

struct TimerState {
  std::size_t trigger = 0;
  TimerKind kind = TimerKind::Delay;
  std::size_t node = 0;
  double initial_value = 0.0;
  double started_at = 0.0;
  double expires_at = 0.0;

  /// Remaining timer content at time t (volume for h1, time for h2).
  double value_at(double t, const PiecewiseSignal& service) const;
};

/// beta_n = B * a_n / sum(a). Throws ModelViolation when sum(a) is not positive.
std::vector<double> service_shares(std::span<const double> alpha_tilde, double B);

struct FlowField {
  std::vector<double> alpha_dot;
  double x_dot = 0.0;
  double w_dot = 0.0;
};

FlowField flow_field(const SystemState& state, const PolicyParams& policy, double alpha_tilde_total, double B);

/// Recorded sample path: event log plus every state/flow signal.
struct Trajectory {
  std::size_t n_nodes = 0;
  double horizon = 0.0;
  std::vector<double> thetas;
  std::vector<EventRecord> events;
  std::vector<PiecewiseSignal> alpha;
  std::vector<PiecewiseSignal> timeout_flag;  // 1 on TOP_n, 0 on NP_n
  std::vector<PiecewiseSignal> lambda;
  PiecewiseSignal alpha_total;
  PiecewiseSignal buffer;
  PiecewiseSignal service;

  /// Arrival time of the fluid at the head of the buffer, t - w(t).
  double head_arrival(double t) const;
  double waiting_time(double t) const { return t - head_arrival(t); }
  /// Total availability rate sum_n alpha_n(t - w(t)); `left` selects the left limit.
  double alpha_tilde_total(double t, bool left = false) const;
  double alpha_tilde(std::size_t n, double t) const;
  double gamma(std::size_t n, double t) const;
  std::vector<double> beta(double t) const;
};

class Simulator {
 public:
  struct Options {
    bool trim_history = false;  // discard history older than the retention window
  };

  struct StepResult {
    EventRecord event;
    SystemState left;  // state at tau_k^-
  };

  Simulator(const Scenario& s, Realization r, Options opt);
  Simulator(const Scenario& s, Realization r) : Simulator(s, std::move(r), Options{}) {}

  const Scenario& scenario() const { return scen_; }
  const SystemState& state() const { return state_; }
  const std::vector<TimerState>& timers() const { return timers_; }
  const Trajectory& trajectory() const { return traj_; }
  Trajectory& trajectory() { return traj_; }
  std::vector<EventRecord>& events() { return traj_.events; }
  bool done() const { return done_; }

  /// Integrates to the earliest pending event and returns it with the left-limit state.
  /// After the horizon is reached the returned event is the End sentinel.
  StepResult advance_to_next_event();

  /// Applies the event returned by the last advance and appends it to the log.
  const SystemState& apply_event(EventRecord ev);

  FlowField current_flow() const;
  double max_waiting_time() const { return w_max_; }

 private:
  struct Candidate {
    double time;
    EventKind kind;
    std::size_t node;
    std::size_t timer_index;
    bool exogenous_cause;
  };

  double slope(std::size_t n) const;
  double guard(std::size_t n, double u) const;
  void extend_provisional(double t1);
  void commit(double tau);
  void collect_endogenous(double t1, std::vector<Candidate>& out) const;
  void trim();

  Scenario scen_;
  Realization real_;
  Options opt_;
  Trajectory traj_;
  SystemState state_;
  std::vector<TimerState> timers_;
  std::size_t next_jump_ = 0;
  double w_max_ = 0.0;
  double retention_ = 0.0;
  double eps_event_ = 0.0;
  double root_tol_ = 0.0;
  double scan_step_ = 0.0;
  double x_slope_ = 0.0;  // d x / dt at the start of the provisional segment
  bool done_ = false;
  std::optional<Candidate> pending_;
};

/// Simulation only: every event-time derivative is left as a zero vector.
Trajectory run_path(const Scenario& s, std::uint64_t seed);

}  // namespace sfm
