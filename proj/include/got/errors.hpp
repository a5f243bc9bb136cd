#pragma once

#include <stdexcept>
#include <string>

namespace got {

// Root of every error thrown by the library. The CLI maps ConfigError,
// ArgumentError and SchemaError to exit status 2 and everything else to 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid call arguments (empty inputs, dimension mismatch, negative sigma).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration (unknown family, bad family parameters, bad grids).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input file does not match the expected schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Exact solver hit its iteration cap.
class SolverError : public Error {
public:
    SolverError(const std::string& what, long long iterations)
        : Error(what), iterations_(iterations) {}
    long long iterations() const noexcept { return iterations_; }

private:
    long long iterations_;
};

/// Iterative scheme stopped before reaching its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_error, long long iterations)
        : Error(what), last_error_(last_error), iterations_(iterations) {}
    double last_error() const noexcept { return last_error_; }
    long long iterations() const noexcept { return iterations_; }

private:
    double last_error_;
    long long iterations_;
};

/// A numeric certificate failed its audit.
class VerificationError : public Error {
public:
    VerificationError(const std::string& what, double offending_t)
        : Error(what), offending_t_(offending_t) {}
    double offending_t() const noexcept { return offending_t_; }

private:
    double offending_t_;
};

inline bool is_usage_error(const std::exception& e) {
    return dynamic_cast<const ArgumentError*>(&e) != nullptr ||
           dynamic_cast<const ConfigError*>(&e) != nullptr ||
           dynamic_cast<const SchemaError*>(&e) != nullptr;
}

}  // namespace got
