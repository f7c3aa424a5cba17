#pragma once

#include <stdexcept>
#include <string>

namespace gesa {

// Malformed input data or violated data invariants.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure: divergence, non-finite activations, failed gradient check.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gesa
