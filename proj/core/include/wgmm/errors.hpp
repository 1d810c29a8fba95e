#pragma once

#include <stdexcept>
#include <string>

namespace wgmm {

/// Malformed or inconsistent external data (files, schemas, CSV rows).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure inside an algorithm (non-finite values, solver breakdown).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace wgmm
