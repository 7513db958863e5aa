#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qstar {

/// Coarse error families. The CLI maps each to an exit code.
enum class ErrorKind {
    domain,       // invalid input, precondition violated
    convergence,  // iterative method did not meet its tolerance
    bracket,      // root not bracketed
    divergence,   // fixed-point iteration failed to contract
    resolution,   // grid too coarse for the requested quantity
    reliability,  // Monte-Carlo estimate not trustworthy (censoring)
    empty_path,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::domain: return "domain_error";
        case ErrorKind::convergence: return "convergence_error";
        case ErrorKind::bracket: return "bracket_error";
        case ErrorKind::divergence: return "divergence_error";
        case ErrorKind::resolution: return "resolution_error";
        case ErrorKind::reliability: return "reliability_error";
        case ErrorKind::empty_path: return "empty_path_error";
    }
    return "error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

/// Carries the last bracket [lo, hi] so callers can inspect how far the search got.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double lo, double hi)
        : Error(ErrorKind::convergence, what), lo_(lo), hi_(hi) {}

    std::pair<double, double> last_bracket() const noexcept { return {lo_, hi_}; }

private:
    double lo_;
    double hi_;
};

class BracketError : public Error {
public:
    explicit BracketError(const std::string& what) : Error(ErrorKind::bracket, what) {}
};

class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& what) : Error(ErrorKind::divergence, what) {}
};

class ResolutionError : public Error {
public:
    explicit ResolutionError(const std::string& what) : Error(ErrorKind::resolution, what) {}
};

class ReliabilityError : public Error {
public:
    explicit ReliabilityError(const std::string& what) : Error(ErrorKind::reliability, what) {}
};

class EmptyPathError : public Error {
public:
    explicit EmptyPathError(const std::string& what) : Error(ErrorKind::empty_path, what) {}
};

}  // namespace qstar
