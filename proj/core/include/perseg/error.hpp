#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace perseg {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Invalid value of a named configuration or profile key.
class ValidationError : public InvalidArgument {
public:
    ValidationError(std::string key, const std::string& what)
        : InvalidArgument(key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Argument lies outside the parameter window where the quantity is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

class NoRoot : public Error {
public:
    using Error::Error;
};

class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, double last_residual, int iterations)
        : Error(what + " (iterations " + std::to_string(iterations) + ", residual " +
                std::to_string(last_residual) + ")"),
          last_residual_(last_residual), iterations_(iterations) {}

    double last_residual() const noexcept { return last_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double last_residual_;
    int iterations_;
};

class NumericalInconsistency : public Error {
public:
    using Error::Error;
};

class AssemblyError : public Error {
public:
    using Error::Error;
};

class BlowUp : public Error {
public:
    BlowUp(const std::string& what, double time)
        : Error(what + " at t = " + std::to_string(time)), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// A positivity-preserving scheme produced a value below its clipping tolerance.
class SchemeViolation : public Error {
public:
    SchemeViolation(const std::string& what, double time)
        : Error(what + " at t = " + std::to_string(time)), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace perseg
