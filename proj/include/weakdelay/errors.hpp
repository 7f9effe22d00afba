#pragma once

#include <stdexcept>
#include <string>

namespace weakdelay {

/// Input outside the mathematical domain of an operation (singular weak
/// values, nonpositive wavelength, invalid angle).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The physical model is inconsistent or outside its validity region.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A record or coefficient set carries no usable information.
class DegenerateError : public ModelError {
public:
    using ModelError::ModelError;
};

class BracketError : public ModelError {
public:
    BracketError(const std::string& what, double residual_lo, double residual_hi)
        : ModelError(what), residual_lo_(residual_lo), residual_hi_(residual_hi) {}

    double residual_lo() const noexcept { return residual_lo_; }
    double residual_hi() const noexcept { return residual_hi_; }

private:
    double residual_lo_;
    double residual_hi_;
};

/// Malformed input file (CSV record, JSON config). Carries the 1-based line
/// number when one is known, 0 otherwise.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace weakdelay
