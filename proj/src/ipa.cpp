#include "sfm/ipa.hpp"

#include <cmath>
#include <sstream>

#include "sfm/errors.hpp"

namespace sfm {

double IpaState::column_sum(std::size_t j) const {
  double s = 0.0;
  for (std::size_t n = 0; n < n_nodes; ++n) s += ap(n, j);
  return s;
}

std::vector<double> waiting_time_derivative(std::span<const double> x_prime_delayed, double alpha_tilde_total) {
  if (!(alpha_tilde_total > 0.0)) throw ModelViolation("waiting-time derivative: availability rate is not positive");
  std::vector<double> out(x_prime_delayed.begin(), x_prime_delayed.end());
  for (double& v : out) v /= alpha_tilde_total;
  return out;
}

namespace {

void check_denominator(double den, double B, const EventRecord& ev) {
  if (std::abs(den) < 1e-12 * std::max(B, 1e-300)) {
    std::ostringstream os;
    os.precision(17);
    os << "vanishing denominator for " << to_string(ev.kind) << " at tau=" << ev.tau;
    throw DegenerateEvent(os.str());
  }
}

}  // namespace

EventDerivative event_time_derivative(const EventRecord& ev, const IpaState& ipa, const EventContext& ctx) {
  const std::size_t N = ipa.n_nodes;
  EventDerivative d{std::vector<double>(N, 0.0)};
  switch (ev.kind) {
    case EventKind::Start:
    case EventKind::End:
    case EventKind::LambdaJump:
    case EventKind::ServiceJump:
      return d;
    case EventKind::BufferNonEmpty: {
      if (ctx.exogenous_cause) return d;
      // B is piecewise constant, so the guard slope is the ramp of sum alpha.
      check_denominator(ctx.alpha_dot_total, ctx.service, ev);
      for (std::size_t j = 0; j < N; ++j) d.tau_prime[j] = -ipa.column_sum(j) / ctx.alpha_dot_total;
      return d;
    }
    case EventKind::BufferEmpty: {
      const double den = ctx.alpha_total - ctx.service;
      check_denominator(den, ctx.service, ev);
      for (std::size_t j = 0; j < N; ++j) d.tau_prime[j] = -ipa.x_prime[j] / den;
      return d;
    }
    case EventKind::TimeoutStart:
    case EventKind::TimeoutEnd: {
      const std::size_t n = *ev.node;
      const double den = ctx.alpha_tilde_total - ctx.service;
      check_denominator(den, ctx.service, ev);
      for (std::size_t j = 0; j < N; ++j) {
        const double ind = j == n ? ctx.alpha_tilde_total : 0.0;
        d.tau_prime[j] = (ind - ctx.x_tilde_prime[j]) / den;
      }
      return d;
    }
    case EventKind::AvailabilityJump: {
      check_denominator(ctx.service, ctx.service, ev);
      for (std::size_t j = 0; j < N; ++j) {
        d.tau_prime[j] = (ctx.trigger_x_prime[j] + ctx.trigger_tau_prime[j] * ctx.trigger_alpha_total[j]) / ctx.service;
      }
      return d;
    }
    case EventKind::FeedbackJump: {
      const std::size_t n = *ev.node;
      for (std::size_t j = 0; j < N; ++j) d.tau_prime[j] = ctx.trigger_tau_prime[j] + (j == n ? 1.0 : 0.0);
      return d;
    }
  }
  return d;
}

void apply_state_jump(const EventRecord& ev, IpaState& ipa, const EventDerivative& d, double delta_alpha,
                      const PolicyParams& policy) {
  const std::size_t N = ipa.n_nodes;
  switch (ev.kind) {
    case EventKind::TimeoutStart: {
      const std::size_t n = *ev.node;
      for (std::size_t j = 0; j < N; ++j) {
        ipa.ap(n, j) = 0.0;
        ipa.x_prime[j] += delta_alpha * d.tau_prime[j];
      }
      break;
    }
    case EventKind::TimeoutEnd: {
      const std::size_t n = *ev.node;
      for (std::size_t j = 0; j < N; ++j) ipa.ap(n, j) -= policy.ramp_rates[n] * d.tau_prime[j];
      break;
    }
    case EventKind::BufferEmpty:
      for (double& v : ipa.x_prime) v = 0.0;
      break;
    default:
      break;
  }
}

FlowDerivatives flow_derivatives(const IpaState& ipa, BufferMode mode) {
  FlowDerivatives f;
  f.alpha_prime_dot.assign(ipa.alpha_prime.size(), 0.0);
  f.x_prime_dot.assign(ipa.n_nodes, 0.0);
  if (mode == BufferMode::NonEmpty) {
    for (std::size_t j = 0; j < ipa.n_nodes; ++j) f.x_prime_dot[j] = ipa.column_sum(j);
  }
  return f;
}

double delayed_alpha_derivative(std::size_t n, std::size_t j, double alpha_prime_delayed, double ramp_rate,
                                bool normal_at_delayed_time) {
  if (j != n || !normal_at_delayed_time) return alpha_prime_delayed;
  return alpha_prime_delayed - ramp_rate;
}

// ---------------------------------------------------------------- IpaTracker

IpaTracker::IpaTracker(std::size_t n_nodes, double prehistory_start) : st_(n_nodes) {
  for (std::size_t i = 0; i < n_nodes * n_nodes; ++i) {
    ap_hist_.emplace_back(PiecewiseSignal::constant(prehistory_start, 0.0, 0.0));
  }
  for (std::size_t j = 0; j < n_nodes; ++j) {
    xp_hist_.emplace_back(PiecewiseSignal::constant(prehistory_start, 0.0, 0.0));
  }
}

void IpaTracker::commit_flow(double t1, BufferMode mode) {
  if (!(t1 > now_)) return;
  const FlowDerivatives f = flow_derivatives(st_, mode);
  const std::size_t N = st_.n_nodes;
  for (std::size_t i = 0; i < N * N; ++i) ap_hist_[i].signal().append_constant(now_, t1, st_.alpha_prime[i]);
  for (std::size_t j = 0; j < N; ++j) {
    xp_hist_[j].signal().append(now_, t1, {st_.x_prime[j], f.x_prime_dot[j], 0.0});
    st_.x_prime[j] += f.x_prime_dot[j] * (t1 - now_);
  }
  now_ = t1;
}

std::vector<double> IpaTracker::x_prime_left(double u) const {
  std::vector<double> out(st_.n_nodes);
  for (std::size_t j = 0; j < st_.n_nodes; ++j) {
    const PiecewiseSignal& s = xp_hist_[j].signal();
    // At the current time the stored segment ends exactly at its left limit.
    out[j] = u >= s.hi() ? st_.x_prime[j] : s.eval_left(u);
  }
  return out;
}

double IpaTracker::alpha_prime_integral(std::size_t n, std::size_t j, double a, double b) const {
  return ap_hist_[n * st_.n_nodes + j].signal().integrate(a, b);
}

double IpaTracker::alpha_prime_at(std::size_t n, std::size_t j, double u) const {
  return ap_hist_[n * st_.n_nodes + j].signal().eval(u);
}

void IpaTracker::set_retention(double theta_max, double w_max) {
  for (auto& h : ap_hist_) h.update_retention(theta_max, w_max);
  for (auto& h : xp_hist_) h.update_retention(theta_max, w_max);
}

void IpaTracker::trim() {
  for (auto& h : ap_hist_) h.trim(now_);
  for (auto& h : xp_hist_) h.trim(now_);
}

}  // namespace sfm
