#pragma once

#include <stdexcept>
#include <string>

namespace lid {

/// Bad input: out-of-domain times, mismatched dimensions, invalid configs.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation produced a non-finite value or failed to converge.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lid
