#pragma once

#include <stdexcept>
#include <string>

namespace sfm {

/// Malformed scenario text or a scenario that violates a model invariant.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lookup outside the retained domain of a signal or history window.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A quantity the model requires to be positive was not (e.g. zero availability).
class ModelViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An event-time derivative whose denominator vanished numerically.
class DegenerateEvent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sfm
