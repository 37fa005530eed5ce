#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ppslab {

// Base class for every library error. kind() is a stable machine-readable
// tag; the CLI forwards it verbatim into error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& m) : Error("dimension_mismatch", m) {}
};

class NotHermitian : public Error {
public:
    explicit NotHermitian(const std::string& m) : Error("not_hermitian", m) {}
};

class NotUnitary : public Error {
public:
    explicit NotUnitary(const std::string& m) : Error("not_unitary", m) {}
};

// Post-selection trace at or below the cutoff: the connection state diverges.
class DegeneratePostSelection : public Error {
public:
    explicit DegeneratePostSelection(const std::string& m)
        : Error("degenerate_post_selection", m) {}
};

class IncompletePovm : public Error {
public:
    explicit IncompletePovm(const std::string& m) : Error("incomplete_povm", m) {}
};

class ZeroProbabilityOutcome : public Error {
public:
    explicit ZeroProbabilityOutcome(const std::string& m)
        : Error("zero_probability_outcome", m) {}
};

class UnnormalizedEffect : public Error {
public:
    explicit UnnormalizedEffect(const std::string& m) : Error("unnormalized_effect", m) {}
};

// The observable commutes with neither factor of the connection state, so
// strong-measurement formulas built on it do not apply.
class CommutationRequired : public Error {
public:
    explicit CommutationRequired(const std::string& m) : Error("commutation_required", m) {}
};

// Two distinct observable eigenvalues drive the meter into the same unitary.
class AliasedCoupling : public Error {
public:
    explicit AliasedCoupling(const std::string& m) : Error("aliased_coupling", m) {}
};

class OutOfScheduleRange : public Error {
public:
    explicit OutOfScheduleRange(const std::string& m) : Error("out_of_schedule_range", m) {}
};

class SingularDesign : public Error {
public:
    explicit SingularDesign(const std::string& m) : Error("singular_design", m) {}
};

class InconsistentData : public Error {
public:
    explicit InconsistentData(const std::string& m) : Error("inconsistent_data", m) {}
};

// Structural violation of a domain-type invariant (non-finite entries,
// negative density operator, out-of-range probability, ...).
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& m) : Error("invalid_argument", m) {}
};

// Malformed file or JSON payload.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& m) : Error("parse_error", m) {}
};

// Bad scenario configuration (CLI usage error, exit code 2).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& m) : Error("config_error", m) {}
};

}  // namespace ppslab
