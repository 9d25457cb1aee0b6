#pragma once

#include <stdexcept>
#include <string>

namespace pepforge {

// Error taxonomy. The CLI maps these onto exit codes:
// ConfigError -> 2, DataError -> 3, DivergenceError -> 4, anything else -> 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad scalar input: non-finite value, out-of-range argument.
class ValueError : public Error {
public:
    using Error::Error;
};

// Degenerate geometry: coincident atoms, collinear frames.
class GeometryError : public Error {
public:
    using Error::Error;
};

// Tensor / sequence dimension mismatch.
class ShapeError : public Error {
public:
    using Error::Error;
};

// API misuse, e.g. backward() without a recorded forward.
class StateError : public Error {
public:
    using Error::Error;
};

// Bad run configuration (schedule too short, checkpoint mismatch, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Unreadable, unparseable or missing data.
class DataError : public Error {
public:
    using Error::Error;
};

// Non-finite loss or sample state.
class DivergenceError : public Error {
public:
    using Error::Error;
};

} // namespace pepforge
