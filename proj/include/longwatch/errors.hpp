#ifndef LONGWATCH_ERRORS_HPP
#define LONGWATCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace longwatch {

/// Bad arguments, configuration, or missing paths. CLI exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data that cannot be accepted (parse failures, bounds, HTTP). CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Coordinates outside the projection's bounding box.
class BoundsError : public DataError {
public:
    using DataError::DataError;
};

/// Bearing requested between two coincident points.
class DegenerateBearingError : public DataError {
public:
    using DataError::DataError;
};

/// KL divergence with q_i = 0 where p_i > 0.
class UndefinedDivergenceError : public DataError {
public:
    using DataError::DataError;
};

/// Remote fetch failed after all retries; carries the last HTTP status (0 when no response).
class HttpError : public DataError {
public:
    HttpError(const std::string& what, int status) : DataError(what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

/// A report or pipeline identity that must hold did not. CLI exit code 3.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace longwatch

#endif  // LONGWATCH_ERRORS_HPP
