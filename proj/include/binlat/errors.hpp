#pragma once

#include <stdexcept>
#include <string>

namespace binlat {

// Bad user input: malformed files, out-of-domain parameters, inconsistent shapes.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Failures of the mathematics at runtime: non-convergence, domain violations
// that depend on data rather than on configuration alone.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Risk-neutral step probability left (0,1): the one-step model admits arbitrage.
struct ArbitrageError : NumericError {
  ArbitrageError(int step_index, double q_value, const std::string& what)
      : NumericError(what), step(step_index), q(q_value) {}
  int step;
  double q;
};

}  // namespace binlat
