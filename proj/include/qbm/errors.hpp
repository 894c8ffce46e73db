// errors.hpp — Exception hierarchy shared by the qbm library and CLI

#pragma once

#include <stdexcept>
#include <string>

namespace qbm {

// A covariance matrix (or other state object) violating its invariants:
// asymmetric input, unphysical symplectic spectrum, degenerate dispersions.
struct invalid_state_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rejected run configuration (bad key, bad value, inconsistent model).
// Maps to CLI exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested horizon exceeds what the discretized bath can mimic.
// Maps to CLI exit code 3.
struct recurrence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure during a run (e.g. an emitted covariance turned
// unphysical). Maps to CLI exit code 4.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace qbm
