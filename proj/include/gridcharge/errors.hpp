#pragma once

#include <stdexcept>
#include <string>

namespace gridcharge {

/// Base class for all gridcharge errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent external data (trace files, waveforms, signals
/// without usable content). CLI maps this to exit code 3.
class InputError : public Error {
public:
    using Error::Error;
};

/// Invalid parameters or configuration. CLI maps this to exit code 4.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: unstable filter, degenerate estimation. Exit code 4.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace gridcharge
