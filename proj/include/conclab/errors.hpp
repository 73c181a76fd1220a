#pragma once

#include <stdexcept>
#include <string>

namespace conclab {

// Resource-limit errors (atom caps, volume caps, quadrature panel budgets).
// The CLI maps these to exit code 3; malformed input maps to exit code 2.
class cap_exceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class quadrature_budget_exceeded : public cap_exceeded {
 public:
  using cap_exceeded::cap_exceeded;
};

// Requested an integer-lattice path on atoms that do not share a lattice.
class non_lattice_support : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Exact arithmetic left the int64 range; the caller gets no rounded result.
class rational_overflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

}  // namespace conclab
