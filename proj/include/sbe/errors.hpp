#pragma once

#include <stdexcept>
#include <string>

namespace sbe {

/// Input outside an operation's mathematical domain (NaN, w <= 0 for tail bounds, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A caller-supplied object broke its declared contract (non-normalized law,
/// D2 < -1, kernel with nonzero mean, ...).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Exact enumeration or combination sums would exceed the configured cap.
class CapExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

/// The canonical function of a kernel has zero variance.
class DegenerateKernel : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace sbe
