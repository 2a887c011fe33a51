#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sfm/goodput.hpp"
#include "sfm/scenario.hpp"

namespace sfm {

struct FdResult {
  double value = 0.0;          // (G(theta + delta e_j) - G(theta)) / delta
  bool order_changed = false;  // (kind, node) sequences differ
  double G_nominal = 0.0;
  double G_perturbed = 0.0;
};

/// Same seed, theta and theta + delta e_j. Throws SimulationError when the two
/// runs do not share their exogenous jump log.
FdResult fd_gradient(const Scenario& s, std::uint64_t seed, std::size_t j, double delta);

/// (kind, node) sequences of two logs are identical.
bool same_event_order(const std::vector<EventRecord>& a, const std::vector<EventRecord>& b);

/// Default step: delta_rel * max(theta_j, 1).
double fd_step(const Scenario& s, std::size_t j, double delta_rel = 1e-4);

struct FdEntry {
  std::uint64_t seed = 0;
  std::size_t j = 0;
  double ipa = 0.0;
  double fd = 0.0;
  double rel_error = 0.0;
  bool order_changed = false;
  bool degenerate = false;
  bool pass = false;  // meaningful only for order-stable, non-degenerate entries
  // Event-time check on this perturbation.
  std::size_t events_checked = 0;
  std::size_t events_passed = 0;
  double max_event_error = 0.0;
};

struct FdReport {
  double tol_rel = 0.0;
  double delta_rel = 0.0;
  std::vector<FdEntry> entries;

  std::size_t counted() const;        // order-stable, non-degenerate
  std::size_t failures() const;       // counted entries over tolerance
  std::size_t order_changes() const;
  double stable_fraction() const;     // share of perturbed paths that kept their event order
  std::size_t events_checked() const;
  std::size_t events_passed() const;
  double max_rel_error() const;
  bool passed() const { return failures() == 0 && counted() > 0; }
};

/// Relative error between estimates, with a floor so that two near-zero values agree.
double relative_error(double ipa, double fd, double floor = 1e-6);

/// |fd - ipa| / max(|ipa|, 1) <= max(1e-3, 10 delta) is the per-event criterion.
double event_time_tolerance(double delta);

/// Throws std::invalid_argument on an empty seed list.
FdReport compare_ipa_fd(const Scenario& s, std::span<const std::uint64_t> seeds, double delta_rel, double tol_rel,
                        int jobs = 0);

std::string summarize(const FdReport& r);

}  // namespace sfm
