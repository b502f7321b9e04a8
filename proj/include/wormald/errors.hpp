#pragma once

#include <stdexcept>
#include <string>

namespace wormald {

/// Base of every exception thrown by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (dimension mismatch, out-of-range
/// argument, invalid configuration).
class contract_violation : public error {
public:
    using error::error;
};

/// Failures of the numerics themselves, as opposed to bad input.
class numerical_error : public error {
public:
    using error::error;
};

/// A drift function returned a non-finite value at a point inside its domain.
class drift_evaluation_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

/// Every sampled pair in a Lipschitz estimate was degenerate.
class estimation_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class divergence_error : public numerical_error {
public:
    divergence_error(const std::string& what, double s)
        : numerical_error(what), s_(s) {}

    /// Scaled time at which the state stopped being finite.
    double s() const noexcept { return s_; }

private:
    double s_;
};

class precision_loss_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

/// A simulation ran past its hard step cap.
class cap_exceeded_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

/// Degenerate regression input (zero spread, non-positive values).
class fit_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

} // namespace wormald
