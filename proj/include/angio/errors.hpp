#pragma once

#include <stdexcept>
#include <string>

namespace angio {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid grid or field construction (n < 3, L <= 0, non-finite values).
class DomainConfigError : public Error {
public:
    using Error::Error;
};

/// A tridiagonal pivot vanished; the caller should move the spectral shift.
class SpectralShiftError : public Error {
public:
    using Error::Error;
};

/// Iterative solver hit its cap. Carries the last residual / increment seen.
class NonconvergenceError : public Error {
public:
    NonconvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

class SingularJacobianError : public Error {
public:
    using Error::Error;
};

/// Principal eigenfunction came out with a negative entry.
class PositivityViolation : public Error {
public:
    using Error::Error;
};

/// Positive steady branch requested for mu <= mu1.
class BelowThresholdError : public Error {
public:
    using Error::Error;
};

class ThresholdSearchError : public Error {
public:
    using Error::Error;
};

/// Sensitivity function fails V(0)=0, V>0 on (0,inf) on the sample range.
class HypothesisViolation : public Error {
public:
    using Error::Error;
};

/// A density went negative beyond tolerance after a time step.
class PositivityFailure : public Error {
public:
    using Error::Error;
};

class CannotFitError : public Error {
public:
    using Error::Error;
};

/// Configuration parse or validation failure. `key` names the offending entry
/// (empty for syntax errors), `line` is 1-based or 0 when unknown.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string key = {}, int line = 0)
        : Error(what), key_(std::move(key)), line_(line) {}
    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

}  // namespace angio
