#pragma once

#include <stdexcept>
#include <string>

namespace rlcsim {

/// Netlist text could not be parsed or fails a structural invariant.
/// line/column are 1-based; 0 means "not tied to a source location".
struct ParseError : std::runtime_error {
    int line = 0;
    int column = 0;
    ParseError(const std::string& msg, int line_ = 0, int column_ = 0)
        : std::runtime_error(line_ > 0 ? "line " + std::to_string(line_) + ":" +
                                             std::to_string(column_) + ": " + msg
                                       : msg),
          line(line_),
          column(column_) {}
};

/// Circuit is well formed but not admissible for the requested analysis.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Violation of the normal-tree existence conditions:
/// (i)  a loop formed entirely by capacitors and voltage sources, or
/// (ii) a cut-set formed entirely by inductors and current sources.
struct ConditionViolation : ModelError {
    int condition;  // 1 or 2
    explicit ConditionViolation(int which, const std::string& detail)
        : ModelError("condition (" + std::string(which == 1 ? "i" : "ii") + ") violated: " +
                     detail + " (fix: add a small stray " +
                     (which == 1 ? "inductance in the loop" : "capacitance across the cut-set") +
                     ")"),
          condition(which) {}
};

/// Numerical failure: instability, non-convergence, singular solve.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The drift matrix A*H is not Hurwitz, so no stationary covariance exists.
struct NoStationaryState : NumericError {
    using NumericError::NumericError;
};

}  // namespace rlcsim
