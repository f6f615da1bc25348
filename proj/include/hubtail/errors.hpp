#pragma once

#include <stdexcept>
#include <string>

namespace hubtail {

/// Base for errors where the inputs parsed fine but the requested quantity
/// does not exist or cannot be computed. CLI maps these to exit code 2;
/// plain std::invalid_argument (bad usage) maps to exit code 1.
struct computation_error : std::domain_error {
    using std::domain_error::domain_error;
};

/// a/mu is an integer where a non-integer ratio is required: the hub count
/// k = ceil(a/mu) is at a transition and the asymptotic constant is not
/// defined there.
struct integer_ratio_error : computation_error {
    using computation_error::computation_error;
};

/// No finite hub scale eta satisfies (k-1)*mu + E[min{eta*X, mu}] >= a;
/// happens when the demanded truncated mean exceeds its supremum.
struct eta_infinite_error : computation_error {
    using computation_error::computation_error;
};

/// The operation is undefined for this distribution family (e.g. a tail
/// index is required but the family does not have one).
struct unsupported_error : computation_error {
    using computation_error::computation_error;
};

/// An exact method was asked to exceed its enumeration or size budget.
struct budget_error : computation_error {
    using computation_error::computation_error;
};

} // namespace hubtail
