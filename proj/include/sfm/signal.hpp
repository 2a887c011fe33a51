#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace sfm {

/// Quadratic in local time: c[0] + c[1]*(t - start) + c[2]*(t - start)^2.
using Coefficients = std::array<double, 3>;

struct Segment {
  double start = 0.0;
  double end = 0.0;
  Coefficients c{};
  double cum_start = 0.0;  // integral of the signal from the first segment start up to `start`

  double value(double t) const;
  double slope(double t) const;
  double integral_to(double t) const;  // integral over [start, t]
};

/// Piecewise polynomial (degree <= 2) trajectory on a contiguous domain.
///
/// Segments are right-continuous: segment i owns [start_i, start_{i+1}). The
/// last segment also owns its right end. Cumulative integrals are stored per
/// segment so integration and inversion are O(log n). Segments may be dropped
/// from the front (history retention) without changing any retained value.
class PiecewiseSignal {
 public:
  PiecewiseSignal() = default;

  static PiecewiseSignal constant(double lo, double hi, double value);

  /// Appends a segment starting at the current right end (or anywhere when empty).
  void append(double start, double end, const Coefficients& c);
  void append_constant(double start, double end, double value) { append(start, end, {value, 0.0, 0.0}); }

  /// Shrinks the domain to [lo, t_end]; segments starting at or after t_end are removed
  /// unless they are the only one remaining at t_end.
  void truncate(double t_end);

  /// Moves the right end of the last segment (extends or shrinks it).
  void set_end(double t_end);

  /// Drops whole segments that end at or before t. Retained values are unchanged.
  void drop_before(double t);

  bool empty() const { return segs_.empty(); }
  double lo() const;
  double hi() const;
  std::size_t size() const { return segs_.size(); }
  const std::vector<Segment>& segments() const { return segs_; }
  const Segment& last() const { return segs_.back(); }

  /// Right-continuous evaluation. Throws DomainError outside [lo, hi].
  double eval(double t) const;
  /// Left limit at t (value of the segment owning (t - 0)). At lo it equals eval(lo).
  double eval_left(double t) const;
  /// Right derivative at t.
  double slope(double t) const;

  double cumulative(double t) const;  // integral over [lo, t]
  double integrate(double a, double b) const;
  /// Integral of the derivative over [a, b], jumps excluded.
  double integrate_slope(double a, double b) const;

  /// Smallest t with cumulative(t) == target. Requires a strictly positive signal.
  double invert_cumulative(double target) const;

  /// Segment starts strictly inside (a, b).
  std::vector<double> breakpoints(double a, double b) const;
  /// Contiguous run of segments intersecting [a, b] (a, b clamped to the domain).
  std::span<const Segment> segments_overlapping(double a, double b) const;

  const Segment& segment_at(double t) const;
  const Segment& segment_left_of(double t) const;

 private:
  void check_domain(double t) const;
  std::size_t index_at(double t) const;
  std::size_t index_left_of(double t) const;

  std::vector<Segment> segs_;
};

/// A signal paired with a retention duration: everything older than
/// now - retention may be discarded, and lookups there are a hard error.
class HistoryWindow {
 public:
  HistoryWindow() = default;
  explicit HistoryWindow(PiecewiseSignal sig, double retention = 0.0)
      : sig_(std::move(sig)), retention_(retention) {}

  PiecewiseSignal& signal() { return sig_; }
  const PiecewiseSignal& signal() const { return sig_; }
  double retention() const { return retention_; }

  /// Retention grows monotonically: 10% above max(theta_max, running max of w).
  void update_retention(double theta_max, double w_max);
  /// Discards segments older than now - retention. Retention <= 0 keeps everything.
  void trim(double now);

 private:
  PiecewiseSignal sig_;
  double retention_ = 0.0;
};

/// Earliest time in (t0, t1] at which the sign of g differs from its sign at t0.
///
/// The sign is the predicate g > 0. `initial_positive` overrides the sign at t0
/// (useful when g(t0) sits exactly on zero). Sampling uses every `scan_step`
/// plus any `extra_points` inside (t0, t1); the first flagged sample is refined
/// by bisection until the bracket is no wider than `tol`. The returned time is
/// the right end of the final bracket, so the sign there has already changed.
std::optional<double> first_root(const std::function<double(double)>& g, double t0, double t1, double tol,
                                 double scan_step, std::span<const double> extra_points = {},
                                 std::optional<bool> initial_positive = std::nullopt);

}  // namespace sfm
