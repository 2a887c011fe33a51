#include "doctest.h"
#include "sfm/errors.hpp"
#include "sfm/ipa.hpp"

using sfm::EventKind;

namespace {

sfm::EventRecord record(EventKind kind, std::size_t node = 0) {
  sfm::EventRecord e;
  e.kind = kind;
  e.tau = 1.0;
  e.node = node;
  return e;
}

}  // namespace

TEST_CASE("waiting-time derivative scales the delayed buffer derivative") {
  const std::vector<double> zero{0.0, 0.0};
  CHECK(sfm::waiting_time_derivative(zero, 7.0) == std::vector<double>{0.0, 0.0});
  const std::vector<double> xp{2.0, -1.0};
  CHECK(sfm::waiting_time_derivative(xp, 4.0) == std::vector<double>{0.5, -0.25});
  const std::vector<double> one{3.0};
  CHECK(sfm::waiting_time_derivative(one, 3.0) == std::vector<double>{1.0});
  CHECK_THROWS_AS(sfm::waiting_time_derivative(one, 0.0), sfm::ModelViolation);
}

TEST_CASE("exogenous events carry no parameter dependence") {
  sfm::IpaState ipa(2);
  ipa.x_prime = {1.0, 2.0};
  sfm::EventContext ctx;
  ctx.service = 3.0;
  for (EventKind k : {EventKind::LambdaJump, EventKind::ServiceJump, EventKind::Start, EventKind::End}) {
    CHECK(sfm::event_time_derivative(record(k), ipa, ctx).tau_prime == std::vector<double>{0.0, 0.0});
  }
}

TEST_CASE("buffer filling after an emptying interval") {
  sfm::IpaState ipa(1);
  ipa.ap(0, 0) = 0.1;
  sfm::EventContext ctx;
  ctx.alpha_dot_total = 0.5;
  ctx.service = 3.0;
  CHECK(sfm::event_time_derivative(record(EventKind::BufferNonEmpty), ipa, ctx).tau_prime[0] ==
        doctest::Approx(-0.2));
  ctx.exogenous_cause = true;
  CHECK(sfm::event_time_derivative(record(EventKind::BufferNonEmpty), ipa, ctx).tau_prime[0] == 0.0);
}

TEST_CASE("buffer emptying") {
  sfm::IpaState ipa(1);
  ipa.x_prime = {-5.0};
  sfm::EventContext ctx;
  ctx.alpha_total = 2.0;
  ctx.service = 4.0;
  CHECK(sfm::event_time_derivative(record(EventKind::BufferEmpty), ipa, ctx).tau_prime[0] == doctest::Approx(-2.5));
  sfm::IpaState ipa2(1);
  ipa2.x_prime = {5.0};
  CHECK(sfm::event_time_derivative(record(EventKind::BufferEmpty), ipa2, ctx).tau_prime[0] == doctest::Approx(2.5));
}

TEST_CASE("timeout crossings") {
  sfm::IpaState ipa(2);
  sfm::EventContext ctx;
  ctx.alpha_tilde_total = 1.3;
  ctx.service = 1.0;
  ctx.x_tilde_prime = {0.0, 0.0};
  const auto d = sfm::event_time_derivative(record(EventKind::TimeoutStart, 0), ipa, ctx);
  CHECK(d.tau_prime[0] == doctest::Approx(1.3 / 0.3));
  CHECK(d.tau_prime[1] == 0.0);
  ctx.x_tilde_prime = {0.3, 0.6};
  const auto e = sfm::event_time_derivative(record(EventKind::TimeoutEnd, 1), ipa, ctx);
  CHECK(e.tau_prime[0] == doctest::Approx(-1.0));
  CHECK(e.tau_prime[1] == doctest::Approx((1.3 - 0.6) / 0.3));
}

TEST_CASE("vanishing denominators are flagged") {
  sfm::IpaState ipa(1);
  sfm::EventContext ctx;
  ctx.alpha_tilde_total = 2.0;
  ctx.service = 2.0;
  ctx.x_tilde_prime = {0.0};
  CHECK_THROWS_AS(sfm::event_time_derivative(record(EventKind::TimeoutStart), ipa, ctx), sfm::DegenerateEvent);
}

TEST_CASE("induced events follow their trigger") {
  sfm::IpaState ipa(2);
  sfm::EventContext ctx;
  ctx.service = 2.0;
  ctx.trigger_tau_prime = {1.0, 0.5};
  ctx.trigger_x_prime = {0.4, 0.0};
  ctx.trigger_alpha_total = {3.0, 3.0};
  const auto h2 = sfm::event_time_derivative(record(EventKind::FeedbackJump, 1), ipa, ctx);
  CHECK(h2.tau_prime == std::vector<double>{1.0, 1.5});
  const auto h1 = sfm::event_time_derivative(record(EventKind::AvailabilityJump, 1), ipa, ctx);
  CHECK(h1.tau_prime[0] == doctest::Approx((0.4 + 3.0) / 2.0));
  CHECK(h1.tau_prime[1] == doctest::Approx(1.5 / 2.0));
}

TEST_CASE("state jumps at events") {
  const sfm::PolicyParams p{{0.5, 0.5}, {0.1, 0.1}};
  sfm::IpaState ipa(2);
  ipa.alpha_prime = {0.3, -0.2, 0.1, 0.4};
  ipa.x_prime = {1.0, 1.0};
  sfm::EventDerivative d{{2.5, 0.0}};
  sfm::apply_state_jump(record(EventKind::TimeoutEnd, 0), ipa, d, 0.0, p);
  CHECK(ipa.ap(0, 0) == doctest::Approx(0.3 - 1.25));
  CHECK(ipa.ap(0, 1) == doctest::Approx(-0.2));
  sfm::apply_state_jump(record(EventKind::TimeoutStart, 0), ipa, d, 2.0, p);
  CHECK(ipa.ap(0, 0) == 0.0);
  CHECK(ipa.ap(0, 1) == 0.0);
  CHECK(ipa.ap(1, 1) == doctest::Approx(0.4));
  CHECK(ipa.x_prime[0] == doctest::Approx(1.0 + 2.0 * 2.5));
  sfm::apply_state_jump(record(EventKind::BufferEmpty), ipa, d, 0.0, p);
  CHECK(ipa.x_prime == std::vector<double>{0.0, 0.0});
}

TEST_CASE("derivative flow between events") {
  sfm::IpaState ipa(2);
  ipa.alpha_prime = {-0.5, 0.0, -0.5, 1.0};
  const auto f = sfm::flow_derivatives(ipa, sfm::BufferMode::NonEmpty);
  CHECK(f.x_prime_dot == std::vector<double>{-1.0, 1.0});
  CHECK(f.alpha_prime_dot == std::vector<double>(4, 0.0));
  CHECK(sfm::flow_derivatives(ipa, sfm::BufferMode::Empty).x_prime_dot == std::vector<double>{0.0, 0.0});
}

TEST_CASE("delayed availability derivative") {
  CHECK(sfm::delayed_alpha_derivative(0, 0, 0.0, 0.5, true) == -0.5);
  CHECK(sfm::delayed_alpha_derivative(0, 0, 0.0, 0.5, false) == 0.0);
  CHECK(sfm::delayed_alpha_derivative(0, 1, 0.2, 0.5, true) == 0.2);
}

TEST_CASE("tracker records piecewise-constant rate derivatives") {
  sfm::IpaTracker tr(1, -2.0);
  tr.state().ap(0, 0) = 0.5;
  tr.state().x_prime = {1.0};
  tr.commit_flow(2.0, sfm::BufferMode::NonEmpty);
  tr.state().ap(0, 0) = -1.0;
  tr.commit_flow(3.0, sfm::BufferMode::Empty);
  CHECK(tr.alpha_prime_at(0, 0, 1.0) == 0.5);
  CHECK(tr.alpha_prime_at(0, 0, 2.5) == -1.0);
  CHECK(tr.alpha_prime_integral(0, 0, -1.0, 3.0) == doctest::Approx(1.0 - 1.0));
  CHECK(tr.x_prime_left(2.0)[0] == doctest::Approx(2.0));
  CHECK(tr.x_prime_left(1.0)[0] == doctest::Approx(1.5));
  CHECK(tr.x_prime_left(-1.0)[0] == 0.0);
  CHECK(tr.state().x_prime[0] == doctest::Approx(2.0));
}
