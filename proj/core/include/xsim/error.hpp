#pragma once

#include <stdexcept>
#include <string>

namespace xsim {

/// Bad input data: malformed files, invalid series, shape mismatches.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value fell outside the domain of a transform (Box-Cox and friends).
/// Carries the offending element index.
class DomainError : public DataError {
public:
    DomainError(const std::string& what, std::size_t index)
        : DataError(what + " at index " + std::to_string(index)), index_(index) {}

    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// In-sample scaling denominator of MASE/MSIS is zero.
class ZeroDenominatorError : public DataError {
public:
    using DataError::DataError;
};

}  // namespace xsim
