#pragma once

#include <stdexcept>
#include <string>

namespace hammersim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (bad key, out-of-range value).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Attack layout does not fit the geometry (target too close to a bank edge).
class LayoutError : public Error {
public:
    using Error::Error;
};

/// Hammer schedule does not fit the refresh window while refresh is enabled.
class BudgetError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

} // namespace hammersim
