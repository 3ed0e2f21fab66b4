#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mfg {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Failures inside the PDE solves or the step-size search. The driver turns
// these into StopReason::SolverError / StopReason::QagExhausted.
class SolverError : public Error {
public:
    using Error::Error;
};

class NonPositivePhi : public SolverError {
public:
    using SolverError::SolverError;
};

class LinearSolveFailure : public SolverError {
public:
    using SolverError::SolverError;
};

class NewtonDivergence : public SolverError {
public:
    using SolverError::SolverError;
};

class QagExhausted : public SolverError {
public:
    using SolverError::SolverError;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ParseError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Out-of-range or inconsistent parameter. key() names the offending entry.
class ValidationError : public ConfigError {
public:
    ValidationError(std::string key, const std::string& what)
        : ConfigError(key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class ReferenceError : public Error {
public:
    using Error::Error;
};

class MissingReference : public ReferenceError {
public:
    using ReferenceError::ReferenceError;
};

class DigestMismatch : public ReferenceError {
public:
    using ReferenceError::ReferenceError;
};

} // namespace mfg
