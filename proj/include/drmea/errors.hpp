#pragma once

#include <stdexcept>
#include <string>

namespace drmea {

// Error taxonomy. The CLI maps these onto exit codes: ConfigError and
// DataError -> 2, IoError and ParseError -> 3, NumericError -> 4.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid hyperparameters, dimensions, or flag values.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Invalid dataset contents (bad labels, empty classes, too few samples).
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// API contract violations (shape mismatches, non-scalar backward root).
struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

// Filesystem failures.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Malformed text input; carries the 1-based line number.
struct ParseError : Error {
    ParseError(const std::string& msg, long line_in)
        : Error(msg + " (line " + std::to_string(line_in) + ")"), line(line_in) {}
    long line;
};

// Non-finite values where finite ones are required.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Eigen-gap too small for a stable subspace or its derivative; carries the gap.
struct DegenerateSpectrumError : Error {
    DegenerateSpectrumError(const std::string& msg, double gap_in)
        : Error(msg + " (gap " + std::to_string(gap_in) + ")"), gap(gap_in) {}
    double gap;
};

}  // namespace drmea
