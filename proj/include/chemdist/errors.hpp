#ifndef CHEMDIST_ERRORS_HPP
#define CHEMDIST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace chemdist {

// Invalid model or operation parameters (bad kernel exponents, nonpositive
// intensity, odd K, ...).
struct ParameterError : std::invalid_argument {
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// A call that violates an operation's usage contract (invalid vertex id,
// box exceeding the measurement window, non-lattice cloud for LRP, ...).
struct UsageError : std::logic_error {
    explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

// Work that would exceed hard resource guards (point-count overflow,
// scale overflow).
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// A generation window too small for the model's nonlocal parts; the caller
// must increase the pad.
struct BoundaryError : std::runtime_error {
    explicit BoundaryError(const std::string& what) : std::runtime_error(what) {}
};

// Regression requested on insufficient or degenerate data.
struct FitError : std::runtime_error {
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

// A supplied callback broke its declared contract (e.g. a non-local event
// evaluator).
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Malformed experiment configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace chemdist

#endif
