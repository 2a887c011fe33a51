#include "sfm/goodput.hpp"

#include <map>
#include <utility>

#include "sfm/errors.hpp"

namespace sfm {

GoodputAccumulator::GoodputAccumulator(std::size_t n_nodes)
    : n_(n_nodes), G_n_(n_nodes, 0.0), grad_(n_nodes * n_nodes, 0.0), omega_(n_nodes) {}

void GoodputAccumulator::accumulate_interval(std::size_t k, double t0, double t1, const Trajectory& traj,
                                             const IpaTracker& ipa, const std::vector<bool>& in_timeout) {
  if (!(t1 > t0)) return;
  for (std::size_t n = 0; n < n_; ++n) {
    const PiecewiseSignal& a = traj.alpha[n];
    G_n_[n] += a.integrate(t0, t1);
    for (std::size_t j = 0; j < n_; ++j) grad_[n * n_ + j] += ipa.alpha_prime_integral(n, j, t0, t1);
    if (!in_timeout[n]) continue;
    omega_[n].push_back(k);
    const double th = traj.thetas[n];
    G_n_[n] -= 2.0 * a.integrate(t0 - th, t1 - th);
    for (std::size_t j = 0; j < n_; ++j) {
      // d alpha_n(t - theta_n) / d theta_j = alpha'_{n,j}(t - theta_n) - [j = n] * alpha_n'(t - theta_n)
      double d = ipa.alpha_prime_integral(n, j, t0 - th, t1 - th);
      if (j == n) d -= a.integrate_slope(t0 - th, t1 - th);
      grad_[n * n_ + j] -= 2.0 * d;
    }
  }
}

void GoodputAccumulator::accumulate_event_terms(const EventTerms& e) {
  for (std::size_t n = 0; n < n_; ++n) {
    const double jump = e.alpha_left[n] - e.alpha_right[n];
    for (std::size_t j = 0; j < n_; ++j) {
      const double tp = e.tau_prime[j];
      if (tp == 0.0) continue;
      double v = jump * tp;
      if (e.top_before[n]) v -= 2.0 * tp * e.delayed_left[n];
      if (e.top_after[n]) v += 2.0 * tp * e.delayed_right[n];
      grad_[n * n_ + j] += v;
    }
  }
}

GoodputResult GoodputAccumulator::finalize() const {
  GoodputResult r;
  r.G_n = G_n_;
  r.grad = grad_;
  r.total_grad.assign(n_, 0.0);
  for (std::size_t n = 0; n < n_; ++n) {
    r.G += G_n_[n];
    for (std::size_t j = 0; j < n_; ++j) r.total_grad[j] += grad_[n * n_ + j];
  }
  return r;
}

namespace {

struct TriggerMemo {
  std::vector<double> tau_prime;
  std::vector<double> x_prime;
  std::vector<double> alpha_total;
};

// Timeout starts that fire at one instant. A perturbation of theta_j spreads
// them out in the order of their tau'_j; the left limits seen by each member
// include the rate drops of the members that move ahead of it.
struct TieGroup {
  double tau = -1.0;
  std::vector<double> x_prime;
  double alpha_total = 0.0;
  std::vector<std::pair<double, std::vector<double>>> members;  // (rate drop, tau')

  TriggerMemo memo_for(const std::vector<double>& tp) const {
    TriggerMemo m{tp, x_prime, std::vector<double>(tp.size(), alpha_total)};
    for (const auto& [drop, other] : members) {
      for (std::size_t j = 0; j < tp.size(); ++j) {
        if (other[j] < tp[j]) {
          m.x_prime[j] += drop * other[j];
          m.alpha_total[j] -= drop;
        }
      }
    }
    return m;
  }
};

double alpha_dot_total(const SystemState& st, const PolicyParams& p) {
  double s = 0.0;
  for (std::size_t n = 0; n < st.alpha.size(); ++n) s += st.in_timeout(n) ? 0.0 : p.ramp_rates[n];
  return s;
}

}  // namespace

PathResult evaluate_path(const Scenario& s, std::uint64_t seed, const EvalOptions& opt) {
  const std::size_t N = s.n_nodes;
  PathResult out;
  out.seed = seed;
  out.G_n.assign(N, 0.0);
  out.grad.assign(N * N, 0.0);
  out.total_grad.assign(N, 0.0);
  if (!(s.horizon > 0.0)) {
    if (opt.keep_trajectory) out.trajectory = Trajectory{};
    return out;
  }

  Simulator sim(s, realize_processes(s, seed), Simulator::Options{opt.trim_history});
  const Trajectory& traj = sim.trajectory();
  IpaTracker ipa(N, -s.prehistory_length());
  GoodputAccumulator acc(N);

  // Timeout starts by record index: (tie group, tau'). Record 0 stands for the
  // rate jumps at t = 0, which carry no parameter dependence.
  std::vector<TieGroup> groups(1);
  groups[0].x_prime.assign(N, 0.0);
  std::map<std::size_t, std::pair<std::size_t, std::vector<double>>> triggers;
  triggers[0] = {0, std::vector<double>(N, 0.0)};
  std::vector<double> last_empty_tp(N, 0.0);
  double last_empty_tau = -1.0;

  std::vector<bool> top(N);
  for (std::size_t n = 0; n < N; ++n) top[n] = sim.state().in_timeout(n);
  double t_prev = 0.0;

  while (!sim.done()) {
    Simulator::StepResult step = sim.advance_to_next_event();
    EventRecord ev = std::move(step.event);
    const SystemState& left = step.left;
    const double tau = ev.tau;

    ipa.commit_flow(tau, left.buffer_mode);
    acc.accumulate_interval(ev.k - 1, t_prev, tau, traj, ipa, top);

    EventContext ctx;
    ctx.alpha_total = left.alpha_total();
    ctx.alpha_dot_total = alpha_dot_total(left, s.policy);
    ctx.service = traj.service.eval_left(tau);
    ctx.exogenous_cause = ev.exogenous_cause;
    EventDerivative d{std::vector<double>(N, 0.0)};
    try {
      if (ev.kind == EventKind::TimeoutStart || ev.kind == EventKind::TimeoutEnd) {
        if (!left.non_empty()) {
          // Timeout ended by the buffer emptying at the same instant.
          if (tau == last_empty_tau) d.tau_prime = last_empty_tp;
        } else {
          const double head = traj.head_arrival(tau);
          ctx.alpha_tilde_total = traj.alpha_total.eval_left(head);
          ctx.x_tilde_prime = ipa.x_prime_left(head);
          d = event_time_derivative(ev, ipa.state(), ctx);
        }
      } else if (is_induced(ev.kind)) {
        const auto& [gi, tp] = triggers.at(*ev.trigger);
        const TriggerMemo m = groups[gi].memo_for(tp);
        ctx.trigger_tau_prime = m.tau_prime;
        ctx.trigger_x_prime = m.x_prime;
        ctx.trigger_alpha_total = m.alpha_total;
        d = event_time_derivative(ev, ipa.state(), ctx);
      } else {
        d = event_time_derivative(ev, ipa.state(), ctx);
      }
    } catch (const DegenerateEvent&) {
      out.degenerate = true;
      ++out.degenerate_count;
      d.tau_prime.assign(N, 0.0);
    }
    ev.tau_prime = d.tau_prime;
    if (ev.kind == EventKind::BufferEmpty) {
      last_empty_tau = tau;
      last_empty_tp = d.tau_prime;
    }
    if (ev.kind == EventKind::TimeoutStart) {
      if (groups.size() == 1 || groups.back().tau != tau) {
        groups.push_back({tau, ipa.state().x_prime, ctx.alpha_total, {}});
      }
      triggers[ev.k] = {groups.size() - 1, d.tau_prime};
    }

    EventTerms terms;
    terms.tau_prime = d.tau_prime;
    terms.alpha_left = left.alpha;
    terms.top_before = top;
    terms.delayed_left.resize(N);
    terms.delayed_right.resize(N);
    // A delay timer fires exactly theta_n after the rate jump it reports; take
    // the delayed point from the trigger so rounding cannot move it across the jump.
    std::vector<double> delayed_at(N);
    for (std::size_t n = 0; n < N; ++n) delayed_at[n] = tau - s.thetas[n];
    if (ev.kind == EventKind::FeedbackJump) delayed_at[*ev.node] = traj.events.at(*ev.trigger).tau;
    for (std::size_t n = 0; n < N; ++n) terms.delayed_left[n] = traj.alpha[n].eval_left(delayed_at[n]);

    const EventRecord applied = ev;
    sim.apply_event(std::move(ev));
    const SystemState& post = sim.state();

    terms.alpha_right = post.alpha;
    terms.top_after.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
      terms.top_after[n] = post.in_timeout(n);
      const double u = delayed_at[n];
      terms.delayed_right[n] = u < traj.alpha[n].hi() ? traj.alpha[n].eval(u) : post.alpha[n];
      // With the mode unchanged the boundary pair cancels. The delayed rate can
      // only jump here when a delay timer of node n fires at the same instant,
      // and that timer's own record carries the jump.
      const bool own_timer = applied.kind == EventKind::FeedbackJump && *applied.node == n;
      if (!own_timer && terms.top_before[n] == terms.top_after[n]) terms.delayed_right[n] = terms.delayed_left[n];
    }
    acc.accumulate_event_terms(terms);

    double delta_alpha = 0.0;
    if (applied.kind == EventKind::TimeoutStart) {
      delta_alpha = left.alpha[*applied.node] - post.alpha[*applied.node];
      groups.back().members.emplace_back(delta_alpha, d.tau_prime);
    }
    apply_state_jump(applied, ipa.state(), d, delta_alpha, s.policy);

    if (opt.trim_history) {
      ipa.set_retention(s.theta_max(), sim.max_waiting_time());
      ipa.trim();
    }
    for (std::size_t n = 0; n < N; ++n) top[n] = post.in_timeout(n);
    t_prev = tau;
  }

  const GoodputResult g = acc.finalize();
  out.G = g.G;
  out.G_n = g.G_n;
  out.grad = g.grad;
  out.total_grad = g.total_grad;
  out.w_max = sim.max_waiting_time();
  out.events = sim.trajectory().events;
  if (opt.keep_trajectory) {
    out.trajectory = std::move(sim.trajectory());
    for (std::size_t i = 0; i < N * N; ++i) out.alpha_prime.push_back(ipa.alpha_prime_history(i / N, i % N));
    for (std::size_t j = 0; j < N; ++j) out.x_prime.push_back(ipa.x_prime_history(j));
  }
  return out;
}

}  // namespace sfm
