#include "sfm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "sfm/errors.hpp"

namespace sfm {

namespace {
constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Start: return "start";
    case EventKind::LambdaJump: return "E_lambda";
    case EventKind::ServiceJump: return "E_B";
    case EventKind::BufferNonEmpty: return "x>0";
    case EventKind::BufferEmpty: return "x=0";
    case EventKind::TimeoutStart: return "w>theta";
    case EventKind::TimeoutEnd: return "w<=theta";
    case EventKind::AvailabilityJump: return "alpha_tilde_jump";
    case EventKind::FeedbackJump: return "gamma_jump";
    case EventKind::End: return "end";
  }
  return "?";
}

bool is_exogenous(EventKind k) { return k == EventKind::LambdaJump || k == EventKind::ServiceJump; }
bool is_induced(EventKind k) { return k == EventKind::AvailabilityJump || k == EventKind::FeedbackJump; }

int priority(EventKind k) {
  if (is_exogenous(k)) return 0;
  if (is_induced(k)) return 2;
  if (k == EventKind::End) return 3;
  return 1;
}

double SystemState::alpha_total() const { return std::accumulate(alpha.begin(), alpha.end(), 0.0); }

double TimerState::value_at(double t, const PiecewiseSignal& service) const {
  if (t >= expires_at) return 0.0;
  if (kind == TimerKind::Delay) return std::max(0.0, initial_value - (t - started_at));
  return std::max(0.0, initial_value - service.integrate(started_at, t));
}

std::vector<double> service_shares(std::span<const double> alpha_tilde, double B) {
  const double total = std::accumulate(alpha_tilde.begin(), alpha_tilde.end(), 0.0);
  if (!(total > 0.0)) throw ModelViolation("service shares: total availability rate is not positive");
  std::vector<double> beta(alpha_tilde.size());
  for (std::size_t n = 0; n < alpha_tilde.size(); ++n) beta[n] = B * alpha_tilde[n] / total;
  return beta;
}

FlowField flow_field(const SystemState& state, const PolicyParams& policy, double alpha_tilde_total, double B) {
  FlowField f;
  f.alpha_dot.resize(state.alpha.size());
  for (std::size_t n = 0; n < state.alpha.size(); ++n) {
    f.alpha_dot[n] = state.in_timeout(n) ? 0.0 : policy.ramp_rates[n];
  }
  const double a = state.alpha_total();
  f.x_dot = (state.x > 0.0 || a > B) ? a - B : 0.0;
  if (state.x > 0.0) {
    if (!(alpha_tilde_total > 0.0)) throw ModelViolation("waiting-time flow: availability rate is not positive");
    f.w_dot = 1.0 - B / alpha_tilde_total;
  }
  return f;
}

// ---------------------------------------------------------------- Trajectory

double Trajectory::head_arrival(double t) const {
  const double x = buffer.eval(t);
  if (!(x > 0.0)) return t;
  const double s = alpha_total.invert_cumulative(alpha_total.cumulative(t) - x);
  return std::min(s, t);
}

double Trajectory::alpha_tilde_total(double t, bool left) const {
  const double s = head_arrival(t);
  return left ? alpha_total.eval_left(s) : alpha_total.eval(s);
}

double Trajectory::alpha_tilde(std::size_t n, double t) const { return alpha[n].eval(head_arrival(t)); }

double Trajectory::gamma(std::size_t n, double t) const {
  if (timeout_flag[n].eval(t) < 0.5) return 0.0;
  return alpha[n].eval(t - thetas[n]);
}

std::vector<double> Trajectory::beta(double t) const {
  const double s = head_arrival(t);
  std::vector<double> at(n_nodes);
  for (std::size_t n = 0; n < n_nodes; ++n) at[n] = alpha[n].eval(s);
  return service_shares(at, service.eval(t));
}

// ---------------------------------------------------------------- Simulator

Simulator::Simulator(const Scenario& s, Realization r, Options opt)
    : scen_(s), real_(std::move(r)), opt_(opt) {
  const std::size_t n_nodes = scen_.n_nodes;
  const double T = scen_.horizon;
  traj_.n_nodes = n_nodes;
  traj_.horizon = T;
  traj_.thetas = scen_.thetas;
  eps_event_ = scen_.numerics.event_tol_rel * std::max(T, 0.0);
  root_tol_ = scen_.numerics.root_tol_rel * std::max(T, 1e-300);
  scan_step_ = T / static_cast<double>(scen_.numerics.scan_steps);

  if (!(T > 0.0)) {
    done_ = true;
    return;
  }
  if (real_.lambda.size() != n_nodes) throw SimulationError("realization does not match the node count");

  const double H = scen_.prehistory_length();
  const auto& ic = scen_.init;
  state_.t = 0.0;
  state_.x = ic.x0;
  state_.w = ic.w0;
  state_.alpha.resize(n_nodes);
  state_.node_mode.resize(n_nodes);
  double pre_total = 0.0;
  for (std::size_t n = 0; n < n_nodes; ++n) {
    const bool top = ic.w0 > scen_.thetas[n];
    state_.node_mode[n] = top ? NodeMode::Timeout : NodeMode::Normal;
    state_.alpha[n] = top ? scen_.policy.alpha_min[n] : ic.alpha0[n];
    traj_.alpha.push_back(PiecewiseSignal::constant(-H, 0.0, ic.prehistory_alpha[n]));
    traj_.timeout_flag.push_back(PiecewiseSignal::constant(-H, 0.0, 0.0));
    pre_total += ic.prehistory_alpha[n];
  }
  traj_.alpha_total = PiecewiseSignal::constant(-H, 0.0, pre_total);
  traj_.buffer = PiecewiseSignal::constant(-H, 0.0, ic.x0);
  traj_.lambda = real_.lambda;
  traj_.service = real_.service;

  const double B0 = traj_.service.eval(0.0);
  state_.buffer_mode = (state_.x > 0.0 || state_.alpha_total() > B0) ? BufferMode::NonEmpty : BufferMode::Empty;
  w_max_ = ic.w0;
  retention_ = 1.1 * std::max(scen_.theta_max(), w_max_);

  EventRecord start;
  start.k = 0;
  start.tau = 0.0;
  start.kind = EventKind::Start;
  start.tau_prime.assign(n_nodes, 0.0);
  traj_.events.push_back(start);

  // A rate discontinuity at t = 0 (prehistory differs from the initial rate)
  // reaches the head of the buffer and the feedback flow like any other jump.
  for (std::size_t n = 0; n < n_nodes; ++n) {
    if (state_.alpha[n] == ic.prehistory_alpha[n]) continue;
    if (ic.x0 > 0.0) {
      const double target = traj_.service.cumulative(0.0) + ic.x0;
      const double total = traj_.service.cumulative(T);
      const double exp = target < total ? traj_.service.invert_cumulative(target) : kInf;
      timers_.push_back({0, TimerKind::Drain, n, ic.x0, 0.0, exp});
    }
    timers_.push_back({0, TimerKind::Delay, n, scen_.thetas[n], 0.0, scen_.thetas[n]});
  }
}

double Simulator::slope(std::size_t n) const {
  return state_.in_timeout(n) ? 0.0 : scen_.policy.ramp_rates[n];
}

double Simulator::guard(std::size_t n, double u) const {
  // Sign of w(u) - theta_n: under FCFS, w > theta_n exactly when the buffer holds
  // more than the fluid sent during the last theta_n time units.
  return traj_.buffer.eval(u) - traj_.alpha_total.integrate(u - scen_.thetas[n], u);
}

void Simulator::extend_provisional(double t1) {
  const double t = state_.t;
  double slope_total = 0.0;
  for (std::size_t n = 0; n < scen_.n_nodes; ++n) {
    const double r = slope(n);
    slope_total += r;
    traj_.alpha[n].append(t, t1, {state_.alpha[n], r, 0.0});
    traj_.timeout_flag[n].append_constant(t, t1, state_.in_timeout(n) ? 1.0 : 0.0);
  }
  const double a = state_.alpha_total();
  traj_.alpha_total.append(t, t1, {a, slope_total, 0.0});
  if (state_.non_empty()) {
    double dx = a - traj_.service.eval(t);
    if (state_.x <= 0.0) dx = std::max(dx, 0.0);
    x_slope_ = dx;
    traj_.buffer.append(t, t1, {state_.x, dx, slope_total / 2.0});
  } else {
    x_slope_ = 0.0;
    traj_.buffer.append(t, t1, {0.0, 0.0, 0.0});
  }
}

void Simulator::collect_endogenous(double t1, std::vector<Candidate>& out) const {
  const double t = state_.t;
  const std::size_t n_nodes = scen_.n_nodes;
  const double B = traj_.service.eval(t);
  double slope_total = 0.0;
  for (std::size_t n = 0; n < n_nodes; ++n) slope_total += slope(n);
  const double a = state_.alpha_total();

  if (!state_.non_empty()) {
    for (std::size_t n = 0; n < n_nodes; ++n) {
      if (state_.in_timeout(n)) out.push_back({t, EventKind::TimeoutEnd, n, 0, false});
    }
    if (a > B) {
      out.push_back({t, EventKind::BufferNonEmpty, kNoNode, 0, true});
    } else if (slope_total > 0.0) {
      const double u = t + (B - a) / slope_total;
      if (u <= t1) out.push_back({std::max(u, t), EventKind::BufferNonEmpty, kNoNode, 0, false});
    }
    return;
  }

  // Buffer boundary: x(t + d) = x + dx d + c d^2 on the current mode.
  {
    const double x0 = state_.x;
    double dx = a - B;
    if (x0 <= 0.0) dx = std::max(dx, 0.0);
    const double c = slope_total / 2.0;
    if (x0 <= 0.0) {
      if (dx == 0.0 && c == 0.0) out.push_back({t, EventKind::BufferEmpty, kNoNode, 0, false});
    } else if (dx < 0.0) {
      double d = kInf;
      if (c == 0.0) {
        d = -x0 / dx;
      } else {
        const double disc = dx * dx - 4.0 * c * x0;
        if (disc >= 0.0) d = 2.0 * x0 / (-dx + std::sqrt(disc));
      }
      if (t + d <= t1) out.push_back({t + d, EventKind::BufferEmpty, kNoNode, 0, false});
    }
  }

  for (std::size_t n = 0; n < n_nodes; ++n) {
    const bool top = state_.in_timeout(n);
    const EventKind kind = top ? EventKind::TimeoutEnd : EventKind::TimeoutStart;
    if ((guard(n, t) > 0.0) != top) {
      out.push_back({t, kind, n, 0, false});
      continue;
    }
    if (!(t1 > t)) continue;
    // Between consecutive grid points the guard is monotone: its derivative is
    // alpha(u - theta_n) - B, linear on every history segment shifted by theta_n.
    const double th = scen_.thetas[n];
    std::vector<double> extra;
    for (const Segment& seg : traj_.alpha_total.segments_overlapping(t - th, t1 - th)) {
      if (seg.start > t - th) extra.push_back(seg.start + th);
      if (seg.c[1] != 0.0) {
        const double v = seg.start + (B - seg.c[0]) / seg.c[1];
        if (v > std::max(seg.start, t - th) && v < std::min(seg.end, t1 - th)) extra.push_back(v + th);
      }
    }
    const auto root = first_root([this, n](double u) { return guard(n, u); }, t, t1, root_tol_,
                                 std::min(scan_step_, t1 - t), extra, top);
    if (root) out.push_back({*root, kind, n, 0, false});
  }
}

void Simulator::commit(double tau) {
  const double t = state_.t;
  for (std::size_t n = 0; n < scen_.n_nodes; ++n) {
    traj_.alpha[n].truncate(tau);
    traj_.timeout_flag[n].truncate(tau);
  }
  traj_.alpha_total.truncate(tau);
  traj_.buffer.truncate(tau);
  if (tau > t) {
    for (std::size_t n = 0; n < scen_.n_nodes; ++n) state_.alpha[n] = traj_.alpha[n].last().value(tau);
    state_.x = state_.non_empty() ? std::max(0.0, traj_.buffer.last().value(tau)) : 0.0;
  }
  state_.t = tau;
  state_.w = state_.x > 0.0 ? tau - traj_.head_arrival(tau) : 0.0;
  w_max_ = std::max(w_max_, state_.w);
}

Simulator::StepResult Simulator::advance_to_next_event() {
  if (done_) throw std::logic_error("advance past the end of the horizon");
  const double t = state_.t;
  const double T = scen_.horizon;

  std::vector<Candidate> cands;
  if (next_jump_ < real_.jumps.size()) {
    const ExogenousJump& j = real_.jumps[next_jump_];
    cands.push_back({std::max(j.time, t), j.is_service ? EventKind::ServiceJump : EventKind::LambdaJump,
                     j.is_service ? kNoNode : j.node, 0, false});
  }
  for (std::size_t i = 0; i < timers_.size(); ++i) {
    const TimerState& tm = timers_[i];
    if (tm.expires_at < T) {
      cands.push_back({std::max(tm.expires_at, t),
                       tm.kind == TimerKind::Drain ? EventKind::AvailabilityJump : EventKind::FeedbackJump, tm.node, i,
                       false});
    }
  }
  double t1 = T;
  for (const Candidate& c : cands) t1 = std::min(t1, c.time);

  if (t1 > t) extend_provisional(t1);
  collect_endogenous(t1, cands);
  cands.erase(std::remove_if(cands.begin(), cands.end(), [T](const Candidate& c) { return !(c.time < T); }),
              cands.end());
  cands.push_back({T, EventKind::End, kNoNode, 0, false});

  double t_min = kInf;
  for (const Candidate& c : cands) t_min = std::min(t_min, c.time);
  const Candidate* chosen = nullptr;
  auto key = [](const Candidate& c) { return std::make_tuple(priority(c.kind), c.node, c.time); };
  for (const Candidate& c : cands) {
    if (c.time > t_min + eps_event_) continue;
    if (!chosen || key(c) < key(*chosen)) chosen = &c;
  }
  pending_ = *chosen;

  commit(pending_->time);

  StepResult out;
  out.left = state_;
  EventRecord& ev = out.event;
  ev.k = traj_.events.size();
  ev.tau = pending_->time;
  ev.kind = pending_->kind;
  if (pending_->node != kNoNode) ev.node = pending_->node;
  if (is_induced(ev.kind)) ev.trigger = timers_[pending_->timer_index].trigger;
  ev.exogenous_cause = pending_->exogenous_cause;
  ev.tau_prime.assign(scen_.n_nodes, 0.0);
  return out;
}

const SystemState& Simulator::apply_event(EventRecord ev) {
  if (!pending_) throw std::logic_error("apply_event without a pending event");
  const Candidate c = *pending_;
  pending_.reset();
  const double tau = state_.t;
  switch (ev.kind) {
    case EventKind::LambdaJump:
    case EventKind::ServiceJump:
      ++next_jump_;
      break;
    case EventKind::BufferNonEmpty:
      state_.buffer_mode = BufferMode::NonEmpty;
      break;
    case EventKind::BufferEmpty:
      state_.buffer_mode = BufferMode::Empty;
      state_.x = 0.0;
      state_.w = 0.0;
      break;
    case EventKind::TimeoutStart: {
      const std::size_t n = c.node;
      state_.node_mode[n] = NodeMode::Timeout;
      state_.alpha[n] = scen_.policy.alpha_min[n];
      if (state_.x > 0.0) {
        const double target = traj_.service.cumulative(tau) + state_.x;
        const double total = traj_.service.cumulative(scen_.horizon);
        const double exp = target < total ? traj_.service.invert_cumulative(target) : kInf;
        timers_.push_back({ev.k, TimerKind::Drain, n, state_.x, tau, exp});
      }
      timers_.push_back({ev.k, TimerKind::Delay, n, scen_.thetas[n], tau, tau + scen_.thetas[n]});
      break;
    }
    case EventKind::TimeoutEnd:
      state_.node_mode[c.node] = NodeMode::Normal;
      break;
    case EventKind::AvailabilityJump:
    case EventKind::FeedbackJump:
      timers_.erase(timers_.begin() + static_cast<std::ptrdiff_t>(c.timer_index));
      break;
    case EventKind::End:
      done_ = true;
      break;
    case EventKind::Start:
      throw std::logic_error("start sentinel cannot be applied");
  }
  traj_.events.push_back(std::move(ev));
  if (opt_.trim_history) trim();
  return state_;
}

void Simulator::trim() {
  retention_ = std::max(retention_, 1.1 * std::max(scen_.theta_max(), w_max_));
  const double cut = state_.t - retention_;
  for (std::size_t n = 0; n < scen_.n_nodes; ++n) {
    traj_.alpha[n].drop_before(cut);
    traj_.timeout_flag[n].drop_before(cut);
  }
  traj_.alpha_total.drop_before(cut);
  traj_.buffer.drop_before(cut);
}

FlowField Simulator::current_flow() const {
  const double B = traj_.service.eval(state_.t);
  const double at = state_.x > 0.0 ? traj_.alpha_tilde_total(state_.t) : state_.alpha_total();
  return flow_field(state_, scen_.policy, at, B);
}

Trajectory run_path(const Scenario& s, std::uint64_t seed) {
  Simulator sim(s, realize_processes(s, seed));
  while (!sim.done()) {
    auto step = sim.advance_to_next_event();
    sim.apply_event(std::move(step.event));
  }
  return std::move(sim.trajectory());
}

}  // namespace sfm
