#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "sfm/errors.hpp"
#include "sfm/simulator.hpp"

using sfm::EventKind;

namespace {

sfm::SystemState one_node_state(double alpha, double x, sfm::NodeMode mode) {
  sfm::SystemState st;
  st.alpha = {alpha};
  st.x = x;
  st.node_mode = {mode};
  st.buffer_mode = x > 0.0 ? sfm::BufferMode::NonEmpty : sfm::BufferMode::Empty;
  return st;
}

std::vector<EventKind> kinds(const sfm::Trajectory& t) {
  std::vector<EventKind> out;
  for (const auto& e : t.events) out.push_back(e.kind);
  return out;
}

}  // namespace

TEST_CASE("service shares follow the availability rates") {
  const std::vector<double> a{4.0, 6.0};
  CHECK(sfm::service_shares(a, 10.0) == std::vector<double>{4.0, 6.0});
  CHECK(sfm::service_shares(a, 5.0) == std::vector<double>{2.0, 3.0});
  const std::vector<double> single{7.0};
  CHECK(sfm::service_shares(single, 3.0) == std::vector<double>{3.0});
  const std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(sfm::service_shares(zero, 1.0), sfm::ModelViolation);
}

TEST_CASE("flow field on a non-empty buffer") {
  const sfm::PolicyParams p{{0.5}, {0.5}};
  const auto f = sfm::flow_field(one_node_state(8.0, 3.0, sfm::NodeMode::Normal), p, 10.0, 5.0);
  CHECK(f.w_dot == doctest::Approx(0.5));
  CHECK(f.x_dot == doctest::Approx(3.0));
  CHECK(f.alpha_dot[0] == 0.5);
}

TEST_CASE("flow field on an empty buffer") {
  const sfm::PolicyParams p{{0.5}, {0.5}};
  const auto f = sfm::flow_field(one_node_state(2.0, 0.0, sfm::NodeMode::Normal), p, 2.0, 3.0);
  CHECK(f.x_dot == 0.0);
  CHECK(f.w_dot == 0.0);
}

TEST_CASE("rates hold during timeout and ramp otherwise") {
  const sfm::PolicyParams p{{0.8}, {0.5}};
  CHECK(sfm::flow_field(one_node_state(2.0, 1.0, sfm::NodeMode::Timeout), p, 2.0, 3.0).alpha_dot[0] == 0.0);
  CHECK(sfm::flow_field(one_node_state(2.0, 1.0, sfm::NodeMode::Normal), p, 2.0, 3.0).alpha_dot[0] == 0.8);
}

TEST_CASE("buffer empties at the closed-form root") {
  const sfm::Scenario s = sfm::parse_scenario(sfm_test::kDrainScenario);
  const sfm::Trajectory t = sfm::run_path(s, 1);
  REQUIRE(kinds(t) == std::vector<EventKind>{EventKind::Start, EventKind::BufferEmpty, EventKind::BufferNonEmpty,
                                             EventKind::End});
  CHECK(t.events[1].tau == doctest::Approx(6.0 - 2.0 * std::sqrt(5.0)).epsilon(1e-12));
  CHECK(t.events[2].tau == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(t.buffer.eval(1.0) == doctest::Approx(4.0 - 3.0 + 0.25).epsilon(1e-12));
  CHECK(t.buffer.eval(7.0) == doctest::Approx(0.25 * 49.0 - 3.0 * 7.0 - 0.25 * 36.0 + 18.0).epsilon(1e-12));
}

TEST_CASE("without timeouts only exogenous and buffer events occur") {
  const sfm::Scenario s = sfm_test::scenario_file("no_timeout.yaml");
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const sfm::Trajectory t = sfm::run_path(s, seed);
    for (const auto& e : t.events) {
      const bool allowed = e.kind == EventKind::Start || e.kind == EventKind::End || sfm::is_exogenous(e.kind) ||
                           e.kind == EventKind::BufferEmpty || e.kind == EventKind::BufferNonEmpty;
      CHECK(allowed);
    }
  }
}

TEST_CASE("drain timer starts from the buffer content") {
  sfm::Scenario s = sfm::parse_scenario(R"(
nodes: 1
horizon: 10
thetas: [4]
policy: {ramp_rates: [0.5], alpha_min: [0.5]}
initial: {alpha0: [2], w0: 3.5, prehistory_alpha: [2]}
lambda:
  - {kind: constant, value: 4}
service: {kind: constant, value: 1}
)");
  CHECK(s.init.x0 == 7.0);
  sfm::Simulator sim(s, sfm::realize_processes(s, 1));
  CHECK(sim.timers().empty());
  // w0 < theta: the path eventually crosses theta and arms both timers.
  while (!sim.done()) {
    auto step = sim.advance_to_next_event();
    const EventKind k = step.event.kind;
    sim.apply_event(std::move(step.event));
    if (k == EventKind::TimeoutStart) break;
  }
  REQUIRE(sim.timers().size() == 2);
  const double x = sim.state().x;
  const double tau = sim.state().t;
  for (const auto& tm : sim.timers()) {
    if (tm.kind == sfm::TimerKind::Drain) {
      CHECK(tm.initial_value == doctest::Approx(x));
      CHECK(tm.expires_at == doctest::Approx(tau + x / 1.0));
    } else {
      CHECK(tm.initial_value == 4.0);
      CHECK(tm.expires_at == doctest::Approx(tau + 4.0));
    }
  }
}

TEST_CASE("zero horizon gives an empty log") {
  sfm::Scenario s = sfm::parse_scenario(sfm_test::kDrainScenario);
  s.horizon = 0.0;
  sfm::Simulator sim(s, sfm::realize_processes(s, 1));
  CHECK(sim.done());
  CHECK(sim.trajectory().events.size() <= 1);
}

TEST_CASE("paths are deterministic") {
  const sfm::Scenario s = sfm_test::scenario_file("three_nodes.yaml");
  const sfm::Trajectory a = sfm::run_path(s, 11);
  const sfm::Trajectory b = sfm::run_path(s, 11);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].tau == b.events[i].tau);
    CHECK(a.events[i].kind == b.events[i].kind);
  }
}

TEST_CASE("mass balance holds on a recorded path") {
  const sfm::Scenario s = sfm_test::scenario_file("three_nodes.yaml");
  const sfm::Trajectory t = sfm::run_path(s, 4);
  const double T = s.horizon;
  // x(T) = x(0) + sent - served, served at rate B while non-empty.
  double served = 0.0;
  for (std::size_t k = 0; k + 1 < t.events.size(); ++k) {
    const double a = t.events[k].tau;
    const double b = t.events[k + 1].tau;
    if (!(b > a)) continue;
    const double mid = t.buffer.eval(a + (b - a) / 2.0);
    if (mid > 0.0) served += t.service.integrate(a, b);
    else served += t.alpha_total.integrate(a, b);
  }
  const double lhs = t.buffer.eval(T);
  const double rhs = s.init.x0 + t.alpha_total.integrate(0.0, T) - served;
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("delay timers fire theta after their triggering start") {
  const sfm::Scenario s = sfm_test::scenario_file("three_nodes.yaml");
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const sfm::Trajectory t = sfm::run_path(s, seed);
    for (const auto& e : t.events) {
      if (e.kind != EventKind::FeedbackJump) continue;
      const auto& trig = t.events.at(*e.trigger);
      CHECK(e.tau - trig.tau == doctest::Approx(s.thetas[*e.node]).epsilon(1e-9));
    }
  }
}

TEST_CASE("node modes follow the waiting time") {
  const sfm::Scenario s = sfm_test::scenario_file("symmetric_n2.yaml");
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const sfm::Trajectory t = sfm::run_path(s, seed);
    for (std::size_t k = 0; k + 1 < t.events.size(); ++k) {
      const double a = t.events[k].tau;
      const double b = t.events[k + 1].tau;
      if (b - a < 1e-6) continue;
      const double m = a + (b - a) / 2.0;
      const double w = t.waiting_time(m);
      for (std::size_t n = 0; n < s.n_nodes; ++n) {
        const bool top = t.timeout_flag[n].eval(m) > 0.5;
        CHECK(top == (w > s.thetas[n]));
      }
    }
  }
}

TEST_CASE("event log is ordered in time") {
  const sfm::Scenario s = sfm_test::scenario_file("three_nodes.yaml");
  const sfm::Trajectory t = sfm::run_path(s, 2);
  CHECK(t.events.front().kind == EventKind::Start);
  CHECK(t.events.back().kind == EventKind::End);
  CHECK(t.events.back().tau == s.horizon);
  for (std::size_t k = 1; k < t.events.size(); ++k) {
    CHECK(t.events[k].tau >= t.events[k - 1].tau);
    CHECK(t.events[k].k == k);
  }
}
