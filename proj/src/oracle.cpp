#include "sfm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>

#include "sfm/errors.hpp"

#ifdef SFM_HAVE_OPENMP
#include <omp.h>
#endif

namespace sfm {

namespace {

Scenario perturbed(const Scenario& s, std::size_t j, double delta) {
  Scenario p = s;
  p.thetas.at(j) += delta;
  if (p.thetas[j] < 0.0) throw std::invalid_argument("perturbed threshold is negative");
  return p;
}

void assert_common_randomness(const Scenario& a, const Scenario& b, std::uint64_t seed) {
  const Realization ra = realize_processes(a, seed);
  const Realization rb = realize_processes(b, seed);
  bool same = ra.jumps.size() == rb.jumps.size();
  for (std::size_t i = 0; same && i < ra.jumps.size(); ++i) {
    same = ra.jumps[i].time == rb.jumps[i].time && ra.jumps[i].is_service == rb.jumps[i].is_service &&
           ra.jumps[i].node == rb.jumps[i].node;
  }
  if (!same) throw SimulationError("nominal and perturbed runs do not share their exogenous jumps");
}

FdEntry compare_one(const Scenario& s, const PathResult& nominal, std::size_t j, double delta, double tol_rel) {
  const Scenario p = perturbed(s, j, delta);
  assert_common_randomness(s, p, nominal.seed);
  const PathResult pert = evaluate_path(p, nominal.seed);

  FdEntry e;
  e.seed = nominal.seed;
  e.j = j;
  e.ipa = nominal.total_grad[j];
  e.fd = (pert.G - nominal.G) / delta;
  e.rel_error = relative_error(e.ipa, e.fd);
  e.order_changed = !same_event_order(nominal.events, pert.events);
  e.degenerate = nominal.degenerate;
  e.pass = e.rel_error <= tol_rel;
  if (!e.order_changed && !e.degenerate) {
    const double tol = event_time_tolerance(delta);
    for (std::size_t k = 0; k < nominal.events.size(); ++k) {
      const EventRecord& a = nominal.events[k];
      if (is_exogenous(a.kind) || a.kind == EventKind::Start || a.kind == EventKind::End) continue;
      const double fd = (pert.events[k].tau - a.tau) / delta;
      const double err = std::abs(fd - a.tau_prime[j]) / std::max(std::abs(a.tau_prime[j]), 1.0);
      ++e.events_checked;
      if (err <= tol) ++e.events_passed;
      e.max_event_error = std::max(e.max_event_error, err);
    }
  }
  return e;
}

}  // namespace

bool same_event_order(const std::vector<EventRecord>& a, const std::vector<EventRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].kind != b[k].kind || a[k].node != b[k].node) return false;
  }
  return true;
}

double fd_step(const Scenario& s, std::size_t j, double delta_rel) {
  return delta_rel * std::max(s.thetas.at(j), 1.0);
}

FdResult fd_gradient(const Scenario& s, std::uint64_t seed, std::size_t j, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const Scenario p = perturbed(s, j, delta);
  assert_common_randomness(s, p, seed);
  const PathResult a = evaluate_path(s, seed);
  const PathResult b = evaluate_path(p, seed);
  return {(b.G - a.G) / delta, !same_event_order(a.events, b.events), a.G, b.G};
}

double relative_error(double ipa, double fd, double floor) {
  return std::abs(fd - ipa) / std::max({std::abs(ipa), std::abs(fd), floor});
}

double event_time_tolerance(double delta) { return std::max(1e-3, 10.0 * delta); }

FdReport compare_ipa_fd(const Scenario& s, std::span<const std::uint64_t> seeds, double delta_rel, double tol_rel,
                        int jobs) {
  if (seeds.empty()) throw std::invalid_argument("seed list is empty");
  FdReport rep;
  rep.tol_rel = tol_rel;
  rep.delta_rel = delta_rel;
  const std::size_t N = s.n_nodes;
  std::vector<std::vector<FdEntry>> per_seed(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  const auto n = static_cast<std::ptrdiff_t>(seeds.size());
  (void)jobs;
#ifdef SFM_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : omp_get_max_threads()) if (jobs != 1)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const PathResult nominal = evaluate_path(s, seeds[idx]);
      for (std::size_t j = 0; j < N; ++j) {
        per_seed[idx].push_back(compare_one(s, nominal, j, fd_step(s, j, delta_rel), tol_rel));
      }
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (auto& v : per_seed) rep.entries.insert(rep.entries.end(), v.begin(), v.end());
  return rep;
}

std::size_t FdReport::counted() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const FdEntry& e) { return !e.order_changed && !e.degenerate; }));
}

std::size_t FdReport::failures() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const FdEntry& e) {
    return !e.order_changed && !e.degenerate && !e.pass;
  }));
}

std::size_t FdReport::order_changes() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const FdEntry& e) { return e.order_changed; }));
}

double FdReport::stable_fraction() const {
  if (entries.empty()) return 0.0;
  return 1.0 - static_cast<double>(order_changes()) / static_cast<double>(entries.size());
}

std::size_t FdReport::events_checked() const {
  std::size_t c = 0;
  for (const FdEntry& e : entries) c += e.events_checked;
  return c;
}

std::size_t FdReport::events_passed() const {
  std::size_t c = 0;
  for (const FdEntry& e : entries) c += e.events_passed;
  return c;
}

double FdReport::max_rel_error() const {
  double m = 0.0;
  for (const FdEntry& e : entries) {
    if (!e.order_changed && !e.degenerate) m = std::max(m, e.rel_error);
  }
  return m;
}

std::string summarize(const FdReport& r) {
  std::ostringstream os;
  os << "paths compared: " << r.entries.size() << "\n"
     << "order changes: " << r.order_changes() << " (stable fraction " << r.stable_fraction() << ")\n"
     << "counted: " << r.counted() << ", failures: " << r.failures() << ", max relative error: " << r.max_rel_error()
     << " (tolerance " << r.tol_rel << ")\n"
     << "event times within tolerance: " << r.events_passed() << " / " << r.events_checked() << "\n"
     << (r.passed() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace sfm
