#pragma once

#include <stdexcept>
#include <string>

namespace lsap {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes or malformed structured values.
class ShapeError : public Error {
public:
    using Error::Error;
};

// NaN/Inf produced, division by zero, divergence.
class NumericError : public Error {
public:
    using Error::Error;
};

// Invalid configuration, bad arguments, unreadable files.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace lsap
