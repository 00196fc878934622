#pragma once

#include <stdexcept>
#include <string>

namespace switchsim {

/// Probability escaped past the configured truncated-basis bound.
class TruncationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Phase requested at a point where the underlying amplitude vanishes.
class UndefinedPhaseError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Conditional amplitude requested with a vanishing conditioning amplitude.
class UndefinedConditionalError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Conditioning on a measurement outcome of zero probability.
class ZeroProbabilityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inputs pushed the lowest-order model outside its validity region.
class ModelValidityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fit cannot proceed (degenerate design matrix, unusable series).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Phase difference requested between fits whose periods were not tied.
class PeriodMismatchError : public FitError {
public:
    using FitError::FitError;
};

/// Descriptor file rejected; the message carries file/line/field context.
class DescriptorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace switchsim
