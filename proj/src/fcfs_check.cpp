#include "sfm/fcfs_check.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace sfm {

namespace {

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kNodes = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                          0.9061798459386640};
constexpr std::array<double, 5> kWeights = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                            0.2369268850561891, 0.2369268850561891};

double class_service(const Trajectory& traj, std::size_t n, double t) {
  const double s = traj.head_arrival(t);
  return traj.service.eval(t) * traj.alpha[n].eval(s) / traj.alpha_total.eval(s);
}

double served(const Trajectory& traj, std::size_t n, double a, double b) {
  if (!(b > a)) return 0.0;
  if (!(traj.buffer.eval(a + (b - a) / 2.0) > 0.0)) return traj.alpha[n].integrate(a, b);
  const double h = (b - a) / 2.0;
  const double m = a + h;
  double acc = 0.0;
  for (std::size_t i = 0; i < kNodes.size(); ++i) acc += kWeights[i] * class_service(traj, n, m + h * kNodes[i]);
  return acc * h;
}

}  // namespace

ClassBuffers::ClassBuffers(const Trajectory& traj, const Scenario& s, std::size_t substeps_per_horizon)
    : traj_(traj), w0_(s.init.w0) {
  const double T = traj.horizon;
  const double h = T / static_cast<double>(std::max<std::size_t>(substeps_per_horizon, 1));
  std::vector<double> pts;
  for (const EventRecord& e : traj.events) pts.push_back(e.tau);
  for (double t = 0.0; t < T; t += h) pts.push_back(t);
  pts.push_back(T);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  grid_ = pts;

  const std::size_t N = traj.n_nodes;
  x_.assign(N, std::vector<double>(grid_.size(), 0.0));
  for (std::size_t n = 0; n < N; ++n) {
    x_[n][0] = s.init.prehistory_alpha[n] * s.init.w0;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
      const double a = grid_[i - 1];
      const double b = grid_[i];
      const double v = x_[n][i - 1] + traj.alpha[n].integrate(a, b) - served(traj, n, a, b);
      x_[n][i] = traj.buffer.eval(b) > 0.0 ? std::max(v, 0.0) : 0.0;
    }
  }
}

double ClassBuffers::content(std::size_t n, double t) const {
  auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  const std::size_t i = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
  const double a = grid_[i];
  if (t <= a) return x_[n][i];
  if (!(traj_.buffer.eval(t) > 0.0)) return 0.0;
  return std::max(0.0, x_[n][i] + traj_.alpha[n].integrate(a, t) - served(traj_, n, a, t));
}

double ClassBuffers::waiting_time(std::size_t n, double t) const {
  const double x = content(n, t);
  if (!(x > 0.0)) return 0.0;
  const PiecewiseSignal& a = traj_.alpha[n];
  const auto sent = [&](double w) { return a.integrate(std::max(t - w, a.lo()), t); };
  double lo = 0.0;
  double hi = t - a.lo();
  if (sent(hi) < x) return hi;
  for (int it = 0; it < 200; ++it) {
    const double m = lo + (hi - lo) / 2.0;
    if (m <= lo || m >= hi) break;
    if (sent(m) < x) lo = m; else hi = m;
  }
  return lo + (hi - lo) / 2.0;
}

FcfsReport check_fcfs(const Trajectory& traj, const Scenario& s, std::size_t n_samples) {
  FcfsReport rep;
  const double T = traj.horizon;
  if (!(T > 0.0)) return rep;
  ClassBuffers cb(traj, s);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t = (static_cast<double>(i) + 0.5) * T / static_cast<double>(n_samples);
    const double w = traj.waiting_time(t);
    for (std::size_t n = 0; n < traj.n_nodes; ++n) {
      rep.max_wait_error = std::max(rep.max_wait_error, std::abs(cb.waiting_time(n, t) - w));
    }
    const std::vector<double> beta = traj.beta(t);
    const double B = traj.service.eval(t);
    const double sum = std::accumulate(beta.begin(), beta.end(), 0.0);
    rep.max_share_error = std::max(rep.max_share_error, std::abs(sum - B) / B);
    ++rep.samples;
  }

  // Head arrival must advance across every non-empty period.
  rep.min_head_increment = std::numeric_limits<double>::infinity();
  const auto& ev = traj.events;
  std::vector<double> pts;
  auto flush = [&]() {
    for (std::size_t i = 1; i < pts.size(); ++i) {
      rep.min_head_increment = std::min(rep.min_head_increment, traj.head_arrival(pts[i]) - traj.head_arrival(pts[i - 1]));
    }
    pts.clear();
  };
  for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
    const double a = ev[k].tau;
    const double b = ev[k + 1].tau;
    if (!(b > a)) continue;
    const double m = a + (b - a) / 2.0;
    if (traj.buffer.eval(m) > 0.0) {
      if (pts.empty() || pts.back() < a) pts.push_back(a);
      pts.push_back(m);
      pts.push_back(b);
    } else {
      flush();
    }
  }
  flush();
  return rep;
}

}  // namespace sfm
