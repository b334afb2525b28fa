#pragma once

#include <stdexcept>

namespace gcl {

// Shape disagreement between operands; the message names both shapes.
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or mutually inconsistent on-disk data / configuration.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values or numerically invalid input.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API misuse: stale caches, degenerate batches.
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gcl
