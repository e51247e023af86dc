#pragma once

#include <stdexcept>
#include <string>

namespace snmc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration or domain-rule violation (maps to CLI exit 2).
class ValidationError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// theta1 - theta2^2 at or below the degeneracy tolerance: the raw index
// ratio is meaningless (constant-Q sample). Callers fall back to the
// shifted ratio.
class DegenerateDenominator : public Error {
public:
    using Error::Error;
};

// Evaluation budget violations (CLI exit 3).
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class BudgetAlreadyConsumed : public Error {
public:
    using Error::Error;
};

// Evaluation-table file problems: bad magic, short file, checksum.
class TableIoError : public Error {
public:
    using Error::Error;
};

// External-model subprocess protocol failures (CLI exit 4).
class ProtocolError : public Error {
public:
    using Error::Error;
};

} // namespace snmc
