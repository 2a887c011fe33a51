#include <cmath>

#include "doctest.h"
#include "sfm/errors.hpp"
#include "sfm/signal.hpp"

using sfm::PiecewiseSignal;

TEST_CASE("eval on constant and linear segments") {
  const auto c = PiecewiseSignal::constant(0.0, 10.0, 3.0);
  CHECK(c.eval(4.0) == 3.0);

  PiecewiseSignal lin;
  lin.append(0.0, 10.0, {2.0, 0.5, 0.0});
  CHECK(lin.eval(2.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(lin.eval(10.5), sfm::DomainError);
}

TEST_CASE("domain error names the time and the domain") {
  const auto c = PiecewiseSignal::constant(0.0, 10.0, 1.0);
  try {
    c.eval(10.5);
    FAIL("expected a domain error");
  } catch (const sfm::DomainError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("10.5") != std::string::npos);
    CHECK(msg.find("[0, 10]") != std::string::npos);
  }
}

TEST_CASE("integrate") {
  const auto c = PiecewiseSignal::constant(0.0, 10.0, 2.0);
  CHECK(c.integrate(0.0, 10.0) == doctest::Approx(20.0));
  CHECK(c.integrate(3.0, 3.0) == 0.0);

  PiecewiseSignal lin;
  lin.append(0.0, 2.0, {1.0, 1.0, 0.0});
  // antiderivative t + t^2/2 at t = 2
  CHECK(lin.integrate(0.0, 2.0) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("integration is additive across segments") {
  PiecewiseSignal s;
  s.append(-1.0, 0.5, {2.0, 0.3, 0.0});
  s.append(0.5, 2.0, {1.1, -0.2, 0.05});
  s.append(2.0, 5.0, {4.0, 0.0, 0.0});
  for (double b : {-0.3, 0.5, 1.7, 2.0, 3.3}) {
    const double whole = s.integrate(-0.9, 4.8);
    const double parts = s.integrate(-0.9, b) + s.integrate(b, 4.8);
    CHECK(std::abs(whole - parts) <= 1e-12 * std::abs(whole));
  }
}

TEST_CASE("right-continuous evaluation and left limits") {
  PiecewiseSignal s;
  s.append_constant(0.0, 1.0, 5.0);
  s.append_constant(1.0, 2.0, 7.0);
  CHECK(s.eval(1.0) == 7.0);
  CHECK(s.eval_left(1.0) == 5.0);
  CHECK(s.eval_left(0.0) == 5.0);
  CHECK(s.eval(2.0) == 7.0);
}

TEST_CASE("non-contiguous append is rejected") {
  PiecewiseSignal s;
  s.append_constant(0.0, 1.0, 1.0);
  CHECK_THROWS_AS(s.append_constant(1.5, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("invert_cumulative recovers the time") {
  PiecewiseSignal s;
  s.append(0.0, 3.0, {1.0, 0.5, 0.0});
  s.append_constant(3.0, 6.0, 2.0);
  for (double t : {0.0, 0.4, 2.9, 3.0, 4.5, 6.0}) {
    CHECK(s.invert_cumulative(s.cumulative(t)) == doctest::Approx(t).epsilon(1e-12));
  }
}

TEST_CASE("integrate_slope skips jumps") {
  PiecewiseSignal s;
  s.append(0.0, 1.0, {1.0, 2.0, 0.0});
  s.append_constant(1.0, 2.0, 0.5);
  CHECK(s.integrate_slope(0.0, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("drop_before keeps retained values") {
  PiecewiseSignal s;
  s.append_constant(0.0, 1.0, 1.0);
  s.append_constant(1.0, 2.0, 2.0);
  s.append_constant(2.0, 3.0, 3.0);
  const double before = s.integrate(2.2, 3.0);
  s.drop_before(1.5);
  CHECK(s.lo() == 1.0);
  CHECK(s.integrate(2.2, 3.0) == doctest::Approx(before));
  CHECK_THROWS_AS(s.eval(0.5), sfm::DomainError);
}

TEST_CASE("history window retention grows monotonically") {
  sfm::HistoryWindow h(PiecewiseSignal::constant(-5.0, 10.0, 1.0));
  h.update_retention(2.0, 1.0);
  CHECK(h.retention() == doctest::Approx(2.2));
  h.update_retention(1.0, 1.0);
  CHECK(h.retention() == doctest::Approx(2.2));
  h.trim(10.0);
  CHECK_NOTHROW(h.signal().eval(7.8));
}

TEST_CASE("first_root") {
  auto lin = sfm::first_root([](double t) { return t - 5.0; }, 0.0, 10.0, 1e-9, 1e-3);
  REQUIRE(lin);
  CHECK(std::abs(*lin - 5.0) <= 1e-9);

  CHECK_FALSE(sfm::first_root([](double) { return 1.0; }, 0.0, 10.0, 1e-9, 1e-3));

  auto quad = sfm::first_root([](double t) { return (t - 3.0) * (t - 7.0); }, 0.0, 10.0, 1e-9, 1e-3);
  REQUIRE(quad);
  CHECK(std::abs(*quad - 3.0) <= 1e-9);
}

TEST_CASE("first_root brackets a sign change with a small residual") {
  auto g = [](double t) { return std::cos(t) - 0.2; };
  auto r = sfm::first_root(g, 0.0, 4.0, 1e-12, 0.01);
  REQUIRE(r);
  CHECK(std::abs(g(*r)) <= 1e-8);
  CHECK(g(*r - 1e-12) > 0.0);
}
