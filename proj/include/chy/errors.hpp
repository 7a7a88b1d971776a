#pragma once

#include <stdexcept>
#include <string>

namespace chy {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent user input (bad config, malformed recipe, schema
/// violation). Mapped to exit code 3 by the CLI.
struct ConfigError : Error {
    using Error::Error;
};

/// A metric or kernel function failed a strict positivity requirement.
struct PositivityError : Error {
    using Error::Error;
};

/// An iterative procedure did not reach its tolerance within its budget.
struct ConvergenceError : Error {
    using Error::Error;
};

/// Right-hand side incompatible with the degree of the conformal class
/// (nonzero-mean source handed to the linear zero-degree solver).
struct DegreeMismatchError : Error {
    using Error::Error;
};

/// A sign hypothesis of the requested procedure is violated.
struct SignError : Error {
    using Error::Error;
};

/// Violation of an internal consistency condition that should be impossible
/// for valid inputs (e.g. a singular Lefschetz wedge system).
struct InternalError : Error {
    using Error::Error;
};

} // namespace chy
