#include <algorithm>
#include <sstream>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "sfm/csv_export.hpp"
#include "sfm/goodput.hpp"

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("doubles round-trip with the shortest form") {
  CHECK(sfm::format_double(0.1) == "0.1");
  CHECK(sfm::format_double(2.0) == "2");
  CHECK(sfm::format_double(1.0 / 3.0) == "0.3333333333333333");
  const double v = 0.1 + 0.2;
  CHECK(std::stod(sfm::format_double(v)) == v);
}

TEST_CASE("csv headers") {
  const sfm::Scenario s = sfm_test::scenario_file("symmetric_n2.yaml");
  const sfm::PathResult p = sfm::evaluate_path(s, 1, {true, false});
  std::ostringstream tr, ev, dv, gr;
  sfm::write_trajectory_csv(tr, *p.trajectory, 0.5);
  sfm::write_events_csv(ev, p.events, 2);
  sfm::write_derivatives_csv(dv, p, 0.5);
  sfm::write_gradient_csv(gr, {p}, 2);
  CHECK(first_line(tr.str()) == "t,alpha_1,alpha_2,x,w,gamma_1,gamma_2,beta_1,beta_2");
  CHECK(first_line(ev.str()) == "k,tau,kind,node,trigger,tau_prime_1,tau_prime_2");
  CHECK(first_line(dv.str()) ==
        "t,dalpha1_dtheta1,dalpha1_dtheta2,dalpha2_dtheta1,dalpha2_dtheta2,dx_dtheta1,dx_dtheta2");
  CHECK(first_line(gr.str()) ==
        "seed,G,G_1,G_2,dG1_dtheta1,dG1_dtheta2,dG2_dtheta1,dG2_dtheta2,dG_dtheta1,dG_dtheta2,degenerate");
  // One row per event after the header.
  std::size_t rows = 0;
  for (char c : ev.str()) rows += c == '\n';
  CHECK(rows == p.events.size() + 1);
}

TEST_CASE("sample grid contains the events and the horizon") {
  const sfm::Scenario s = sfm_test::scenario_file("sanity_n1.yaml");
  const sfm::PathResult p = sfm::evaluate_path(s, 1, {true, false});
  const auto g = sfm::sample_grid(*p.trajectory, 1.0);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == s.horizon);
  for (const auto& e : p.events) CHECK(std::find(g.begin(), g.end(), e.tau) != g.end());
}
