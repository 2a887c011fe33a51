#include "sfm/signal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sfm/errors.hpp"

namespace sfm {

double Segment::value(double t) const {
  const double d = t - start;
  return c[0] + d * (c[1] + d * c[2]);
}

double Segment::slope(double t) const { return c[1] + 2.0 * c[2] * (t - start); }

double Segment::integral_to(double t) const {
  const double d = t - start;
  return d * (c[0] + d * (c[1] / 2.0 + d * c[2] / 3.0));
}

PiecewiseSignal PiecewiseSignal::constant(double lo, double hi, double value) {
  PiecewiseSignal s;
  s.append_constant(lo, hi, value);
  return s;
}

void PiecewiseSignal::append(double start, double end, const Coefficients& c) {
  if (end < start) {
    throw std::invalid_argument("segment end precedes its start");
  }
  Segment seg{start, end, c, 0.0};
  if (!segs_.empty()) {
    const Segment& prev = segs_.back();
    const double gap = std::abs(start - prev.end);
    if (gap > 1e-12 * std::max(1.0, std::abs(start))) {
      std::ostringstream os;
      os << "non-contiguous segment: previous ends at " << prev.end << ", next starts at " << start;
      throw std::invalid_argument(os.str());
    }
    seg.start = prev.end;
    seg.cum_start = prev.cum_start + prev.integral_to(prev.end);
  }
  segs_.push_back(seg);
}

void PiecewiseSignal::truncate(double t_end) {
  while (segs_.size() > 1 && segs_.back().start >= t_end) {
    segs_.pop_back();
  }
  if (!segs_.empty()) {
    segs_.back().end = std::max(t_end, segs_.back().start);
  }
}

void PiecewiseSignal::set_end(double t_end) {
  if (segs_.empty()) {
    throw std::logic_error("set_end on empty signal");
  }
  segs_.back().end = std::max(t_end, segs_.back().start);
}

void PiecewiseSignal::drop_before(double t) {
  std::size_t n = 0;
  while (n + 1 < segs_.size() && segs_[n].end <= t) {
    ++n;
  }
  if (n > 0) {
    segs_.erase(segs_.begin(), segs_.begin() + static_cast<std::ptrdiff_t>(n));
  }
}

double PiecewiseSignal::lo() const {
  if (segs_.empty()) throw DomainError("empty signal");
  return segs_.front().start;
}

double PiecewiseSignal::hi() const {
  if (segs_.empty()) throw DomainError("empty signal");
  return segs_.back().end;
}

void PiecewiseSignal::check_domain(double t) const {
  if (segs_.empty() || !(t >= segs_.front().start) || !(t <= segs_.back().end)) {
    std::ostringstream os;
    os.precision(17);
    if (segs_.empty()) {
      os << "lookup at t=" << t << " on an empty signal";
    } else {
      os << "lookup at t=" << t << " outside domain [" << segs_.front().start << ", " << segs_.back().end << "]";
    }
    throw DomainError(os.str());
  }
}

std::size_t PiecewiseSignal::index_at(double t) const {
  check_domain(t);
  auto it = std::upper_bound(segs_.begin(), segs_.end(), t, [](double v, const Segment& s) { return v < s.start; });
  return static_cast<std::size_t>(it - segs_.begin()) - 1;
}

std::size_t PiecewiseSignal::index_left_of(double t) const {
  check_domain(t);
  auto it = std::lower_bound(segs_.begin(), segs_.end(), t, [](const Segment& s, double v) { return s.start < v; });
  const auto i = static_cast<std::size_t>(it - segs_.begin());
  return i == 0 ? 0 : i - 1;
}

const Segment& PiecewiseSignal::segment_at(double t) const { return segs_[index_at(t)]; }
const Segment& PiecewiseSignal::segment_left_of(double t) const { return segs_[index_left_of(t)]; }

double PiecewiseSignal::eval(double t) const { return segment_at(t).value(t); }
double PiecewiseSignal::eval_left(double t) const { return segment_left_of(t).value(t); }
double PiecewiseSignal::slope(double t) const { return segment_at(t).slope(t); }

double PiecewiseSignal::cumulative(double t) const {
  const Segment& s = segment_at(t);
  return s.cum_start + s.integral_to(t);
}

double PiecewiseSignal::integrate(double a, double b) const {
  if (a == b) {
    check_domain(a);
    return 0.0;
  }
  return cumulative(b) - cumulative(a);
}

double PiecewiseSignal::integrate_slope(double a, double b) const {
  if (b < a) return -integrate_slope(b, a);
  check_domain(a);
  check_domain(b);
  double total = 0.0;
  for (std::size_t i = index_at(a); i < segs_.size(); ++i) {
    const Segment& s = segs_[i];
    if (s.start >= b) break;
    const double lo = std::max(a, s.start);
    const double hi = std::min(b, s.end);
    if (hi > lo) total += s.value(hi) - s.value(lo);
  }
  return total;
}

double PiecewiseSignal::invert_cumulative(double target) const {
  if (segs_.empty()) throw DomainError("inversion on empty signal");
  const Segment& last = segs_.back();
  const double total = last.cum_start + last.integral_to(last.end);
  const double scale = std::max(1.0, std::abs(total));
  if (target < segs_.front().cum_start - 1e-12 * scale || target > total + 1e-12 * scale) {
    std::ostringstream os;
    os.precision(17);
    os << "cumulative target " << target << " outside [" << segs_.front().cum_start << ", " << total << "]";
    throw DomainError(os.str());
  }
  auto it = std::upper_bound(segs_.begin(), segs_.end(), target,
                             [](double v, const Segment& s) { return v < s.cum_start; });
  std::size_t i = it == segs_.begin() ? 0 : static_cast<std::size_t>(it - segs_.begin()) - 1;
  // Skip zero-width segments so the result lies in a segment with positive rate.
  while (i + 1 < segs_.size() && segs_[i].end <= segs_[i].start) ++i;
  const Segment& s = segs_[i];
  const double r = std::max(0.0, target - s.cum_start);
  const double width = s.end - s.start;
  double d = 0.0;
  if (s.c[2] == 0.0) {
    const double q = s.c[1] / 2.0;
    const double disc = s.c[0] * s.c[0] + 4.0 * q * r;
    if (q == 0.0) {
      d = r / s.c[0];
    } else if (disc >= 0.0 && s.c[0] + std::sqrt(disc) > 0.0) {
      d = 2.0 * r / (s.c[0] + std::sqrt(disc));
    } else {
      d = width;
    }
  } else {
    double a = 0.0;
    double b = width;
    for (int it2 = 0; it2 < 200; ++it2) {
      const double m = a + (b - a) / 2.0;
      if (m <= a || m >= b) break;
      if (s.integral_to(s.start + m) < r) a = m; else b = m;
    }
    d = b;
  }
  if (!std::isfinite(d)) {
    throw ModelViolation("cumulative inversion on a non-positive signal");
  }
  return s.start + std::clamp(d, 0.0, width);
}

std::vector<double> PiecewiseSignal::breakpoints(double a, double b) const {
  std::vector<double> out;
  for (const Segment& s : segs_) {
    if (s.start > a && s.start < b) out.push_back(s.start);
  }
  return out;
}

std::span<const Segment> PiecewiseSignal::segments_overlapping(double a, double b) const {
  if (segs_.empty() || b < a) return {};
  a = std::clamp(a, lo(), hi());
  b = std::clamp(b, lo(), hi());
  const std::size_t i0 = index_at(a);
  const std::size_t i1 = index_at(b);
  return std::span<const Segment>(segs_.data() + i0, i1 - i0 + 1);
}

void HistoryWindow::update_retention(double theta_max, double w_max) {
  retention_ = std::max(retention_, 1.1 * std::max(theta_max, w_max));
}

void HistoryWindow::trim(double now) {
  if (retention_ > 0.0) sig_.drop_before(now - retention_);
}

std::optional<double> first_root(const std::function<double(double)>& g, double t0, double t1, double tol,
                                 double scan_step, std::span<const double> extra_points,
                                 std::optional<bool> initial_positive) {
  if (!(t1 > t0)) return std::nullopt;
  const bool init = initial_positive.value_or(g(t0) > 0.0);
  std::vector<double> grid;
  if (scan_step > 0.0) {
    const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / scan_step));
    grid.reserve(steps + extra_points.size() + 1);
    for (std::size_t i = 1; i < steps; ++i) grid.push_back(t0 + static_cast<double>(i) * scan_step);
  }
  for (double p : extra_points) {
    if (p > t0 && p < t1) grid.push_back(p);
  }
  grid.push_back(t1);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double a = t0;
  for (double p : grid) {
    if ((g(p) > 0.0) != init) {
      double b = p;
      while (b - a > tol) {
        const double m = a + (b - a) / 2.0;
        if (m <= a || m >= b) break;
        if ((g(m) > 0.0) != init) b = m; else a = m;
      }
      return b;
    }
    a = p;
  }
  return std::nullopt;
}

}  // namespace sfm
