// SPDX-License-Identifier: Apache-2.0

#ifndef RFSS_ERRORS_HPP
#define RFSS_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rfss {

// Malformed or inconsistent input data (files, datasets, scene configs).
// The CLI maps these to exit code 3.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numeric or geometric domain violations (d <= 0, degenerate geometry, ...).
// The CLI maps these to exit code 4.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dataset file errors, one type per failure category.
struct MagicError : DataError {
    using DataError::DataError;
};
struct FormatVersionError : DataError {
    using DataError::DataError;
};
struct TruncationError : DataError {
    TruncationError(const std::string &what, std::size_t record)
        : DataError(what), record_index(record) {}
    std::size_t record_index;
};
struct NonFiniteError : DataError {
    using DataError::DataError;
};

// Scene text errors, each carrying the offending line number (1-based, 0 = unknown).
struct SceneError : DataError {
    SceneError(const std::string &what, std::size_t line_no) : DataError(what), line(line_no) {}
    std::size_t line;
};
struct SceneSyntaxError : SceneError {
    using SceneError::SceneError;
};
struct SceneMissingFieldError : SceneError {
    using SceneError::SceneError;
};
struct SceneInvariantError : SceneError {
    using SceneError::SceneError;
};

} // namespace rfss

#endif
