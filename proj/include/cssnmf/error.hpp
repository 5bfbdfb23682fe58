#pragma once

#include <stdexcept>
#include <string>

namespace cssnmf {

// Bad parameters or violated preconditions.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (ragged CSV, dimension mismatch, unreadable file).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical routine could not deliver its contract (rank deficiency, non-convergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cssnmf
