#pragma once

#include <stdexcept>
#include <string>

namespace rumidas {

// Root of the library's error hierarchy. Each subclass names the stage that
// failed so callers (and the CLI) can attach run-phase context.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class InterpolationError : public Error {
public:
    using Error::Error;
};

class SpecError : public Error {
public:
    using Error::Error;
};

class DesignError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class WindowError : public Error {
public:
    using Error::Error;
};

class ScoreError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace rumidas
