#pragma once

#include <stdexcept>
#include <string>

namespace gsbr {

/// Shape or compatibility mismatch between objects (wrong counts, wrong dimensions).
struct StructuralError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An input violates a mathematical precondition (not normal, not commuting, cutoff out of range...).
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Declared asymptotics and the measured behaviour disagree.
struct ClassificationConflict : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The block operator in the resolvent formula is numerically singular.
class SingularFormula : public NumericalError {
public:
    SingularFormula(const std::string& what, double condition) : NumericalError(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

} // namespace gsbr
