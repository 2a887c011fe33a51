#include "sfm/csv_export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sfm {

std::string format_double(double v) {
  char buf[32];
  for (int prec : {15, 16, 17}) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

namespace {

void row(std::ostream& os, const std::vector<double>& vals) {
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (i) os << ',';
    os << format_double(vals[i]);
  }
  os << '\n';
}

}  // namespace

std::vector<double> sample_grid(const Trajectory& traj, double sample_dt) {
  std::vector<double> t;
  const double T = traj.horizon;
  if (sample_dt > 0.0) {
    const auto steps = static_cast<std::size_t>(std::floor(T / sample_dt));
    for (std::size_t i = 0; i <= steps; ++i) t.push_back(static_cast<double>(i) * sample_dt);
  }
  for (const EventRecord& e : traj.events) t.push_back(e.tau);
  t.push_back(T);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  t.erase(std::remove_if(t.begin(), t.end(), [T](double v) { return v < 0.0 || v > T; }), t.end());
  return t;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double sample_dt) {
  const std::size_t N = traj.n_nodes;
  os << "t";
  for (std::size_t n = 1; n <= N; ++n) os << ",alpha_" << n;
  os << ",x,w";
  for (std::size_t n = 1; n <= N; ++n) os << ",gamma_" << n;
  for (std::size_t n = 1; n <= N; ++n) os << ",beta_" << n;
  os << '\n';
  if (traj.events.empty()) return;
  for (double t : sample_grid(traj, sample_dt)) {
    std::vector<double> v{t};
    for (std::size_t n = 0; n < N; ++n) v.push_back(traj.alpha[n].eval(t));
    v.push_back(traj.buffer.eval(t));
    v.push_back(traj.waiting_time(t));
    for (std::size_t n = 0; n < N; ++n) v.push_back(traj.gamma(n, t));
    for (double b : traj.beta(t)) v.push_back(b);
    row(os, v);
  }
}

void write_events_csv(std::ostream& os, const std::vector<EventRecord>& events, std::size_t n_nodes) {
  os << "k,tau,kind,node,trigger";
  for (std::size_t j = 1; j <= n_nodes; ++j) os << ",tau_prime_" << j;
  os << '\n';
  for (const EventRecord& e : events) {
    os << e.k << ',' << format_double(e.tau) << ',' << to_string(e.kind) << ',';
    if (e.node) os << (*e.node + 1);
    os << ',';
    if (e.trigger) os << *e.trigger;
    for (std::size_t j = 0; j < n_nodes; ++j) {
      os << ',' << format_double(j < e.tau_prime.size() ? e.tau_prime[j] : 0.0);
    }
    os << '\n';
  }
}

void write_derivatives_csv(std::ostream& os, const PathResult& path, double sample_dt) {
  const std::size_t N = path.G_n.size();
  os << "t";
  for (std::size_t n = 1; n <= N; ++n) {
    for (std::size_t j = 1; j <= N; ++j) os << ",dalpha" << n << "_dtheta" << j;
  }
  for (std::size_t j = 1; j <= N; ++j) os << ",dx_dtheta" << j;
  os << '\n';
  if (!path.trajectory || path.trajectory->events.empty()) return;
  for (double t : sample_grid(*path.trajectory, sample_dt)) {
    std::vector<double> v{t};
    for (const PiecewiseSignal& s : path.alpha_prime) v.push_back(s.eval(std::min(t, s.hi())));
    for (const PiecewiseSignal& s : path.x_prime) v.push_back(s.eval(std::min(t, s.hi())));
    row(os, v);
  }
}

void write_gradient_csv(std::ostream& os, const std::vector<PathResult>& paths, std::size_t n_nodes) {
  os << "seed,G";
  for (std::size_t n = 1; n <= n_nodes; ++n) os << ",G_" << n;
  for (std::size_t n = 1; n <= n_nodes; ++n) {
    for (std::size_t j = 1; j <= n_nodes; ++j) os << ",dG" << n << "_dtheta" << j;
  }
  for (std::size_t j = 1; j <= n_nodes; ++j) os << ",dG_dtheta" << j;
  os << ",degenerate\n";
  for (const PathResult& p : paths) {
    os << p.seed << ',' << format_double(p.G);
    for (double v : p.G_n) os << ',' << format_double(v);
    for (double v : p.grad) os << ',' << format_double(v);
    for (double v : p.total_grad) os << ',' << format_double(v);
    os << ',' << (p.degenerate ? 1 : 0) << '\n';
  }
}

void write_fd_csv(std::ostream& os, const FdReport& report) {
  os << "seed,j,ipa,fd,rel_error,order_changed,degenerate,pass,events_checked,events_passed,max_event_error\n";
  for (const FdEntry& e : report.entries) {
    os << e.seed << ',' << (e.j + 1) << ',' << format_double(e.ipa) << ',' << format_double(e.fd) << ','
       << format_double(e.rel_error) << ',' << e.order_changed << ',' << e.degenerate << ',' << e.pass << ','
       << e.events_checked << ',' << e.events_passed << ',' << format_double(e.max_event_error) << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points, std::size_t n_nodes) {
  os << "point";
  for (std::size_t n = 1; n <= n_nodes; ++n) os << ",theta_" << n;
  os << ",G_mean,G_stderr,paths\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    os << i;
    for (double v : points[i].theta) os << ',' << format_double(v);
    os << ',' << format_double(points[i].G_mean) << ',' << format_double(points[i].G_stderr) << ','
       << points[i].paths << '\n';
  }
}

void write_optimize_csv(std::ostream& os, const std::vector<Iterate>& history, std::size_t n_nodes) {
  os << "iter";
  for (std::size_t n = 1; n <= n_nodes; ++n) os << ",theta_" << n;
  os << ",G_mean,G_stderr";
  for (std::size_t n = 1; n <= n_nodes; ++n) os << ",grad_" << n;
  os << '\n';
  for (const Iterate& it : history) {
    os << it.iteration;
    for (double v : it.theta) os << ',' << format_double(v);
    os << ',' << format_double(it.estimate.G_mean) << ',' << format_double(it.estimate.G_stderr);
    for (double v : it.estimate.grad) os << ',' << format_double(v);
    os << '\n';
  }
}

}  // namespace sfm
