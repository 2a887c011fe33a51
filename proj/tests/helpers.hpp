#pragma once

#include <string>

#include "sfm/scenario.hpp"

namespace sfm_test {

inline sfm::Scenario scenario_file(const std::string& name) {
  return sfm::load_scenario(std::string(SFM_SCENARIO_DIR) + "/" + name);
}

/// Empties at 6 - 2 sqrt(5), refills at 6: x(t) = 4 - 3t + t^2 / 4 until then.
inline const char* kDrainScenario = R"(
nodes: 1
horizon: 10
thetas: [100]
policy: {ramp_rates: [0.5], alpha_min: [0.5]}
initial: {alpha0: [4], w0: 1}
lambda:
  - {kind: constant, value: 4}
service: {kind: constant, value: 7}
)";

}  // namespace sfm_test
