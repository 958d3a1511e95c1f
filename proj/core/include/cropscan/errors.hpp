#pragma once

#include <stdexcept>

namespace cropscan {

/// Tensor extents do not satisfy an operation's contract.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A value is outside its documented domain (labels, pixel ranges, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Caller-supplied data is structurally invalid (empty sets, duplicates, ...).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A network or run configuration violates its invariants.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A spectral range required by an operation is not covered by the data.
struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A directory or file cannot be mapped to a known class label.
struct LabelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File decode/encode failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cropscan
