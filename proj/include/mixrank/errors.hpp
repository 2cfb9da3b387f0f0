#pragma once

#include <stdexcept>
#include <string>

namespace mixrank {

/// Invalid argument values (bad weights, out-of-range smoothness, ...).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Array extents that do not match the dyadic grid contract.
struct ShapeError : ValidationError {
    using ValidationError::ValidationError;
};

/// Inconsistent coefficient containers (missing blocks, rank mismatches).
struct StructureError : ValidationError {
    using ValidationError::ValidationError;
};

/// Failures inside numerical kernels (SVD non-convergence and friends).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Refusal to materialize something too large for dense processing.
struct SizeGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mixrank
