#pragma once

#include <stdexcept>
#include <string>

namespace fvsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define FVSIM_DEFINE_ERROR(Name)                                               \
    class Name : public Error {                                                \
    public:                                                                    \
        using Error::Error;                                                    \
    }

// Model construction.
FVSIM_DEFINE_ERROR(ModelValidationError);
FVSIM_DEFINE_ERROR(InvalidStart);
FVSIM_DEFINE_ERROR(InvalidInitial);

class DetailedBalanceViolation : public ModelValidationError {
public:
    DetailedBalanceViolation(std::size_t i, std::size_t j, double lhs, double rhs);
    std::size_t first() const { return i_; }
    std::size_t second() const { return j_; }

private:
    std::size_t i_;
    std::size_t j_;
};

class NonpositiveMeasure : public ModelValidationError {
public:
    using ModelValidationError::ModelValidationError;
};

class NegativeRate : public ModelValidationError {
public:
    using ModelValidationError::ModelValidationError;
};

// Linear algebra.
FVSIM_DEFINE_ERROR(SingularSystem);

// Simulation.
FVSIM_DEFINE_ERROR(CensoredStep);
FVSIM_DEFINE_ERROR(WindowTooLarge);
FVSIM_DEFINE_ERROR(HorizonExceedsTrajectory);

// Statistics.
FVSIM_DEFINE_ERROR(EmptySample);
FVSIM_DEFINE_ERROR(DegenerateBins);
FVSIM_DEFINE_ERROR(InvalidArgument);

// Configuration.
FVSIM_DEFINE_ERROR(ConfigParseError);

#undef FVSIM_DEFINE_ERROR

} // namespace fvsim
