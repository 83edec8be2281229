#pragma once

#include <stdexcept>
#include <string>

namespace dpcm {

// Base class for every error the engine raises. Each condition named in a
// module contract gets its own type so callers can dispatch on it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DPCM_ERROR_TYPE(Name)          \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  };

// privacy_core
DPCM_ERROR_TYPE(InvalidParams)
DPCM_ERROR_TYPE(BudgetExhausted)
DPCM_ERROR_TYPE(EmptyInput)

// data
DPCM_ERROR_TYPE(SchemaMismatch)
DPCM_ERROR_TYPE(ParseError)
DPCM_ERROR_TYPE(RecordInvariantViolation)
DPCM_ERROR_TYPE(InvalidConfig)
DPCM_ERROR_TYPE(InvalidFraction)

// preprocess
DPCM_ERROR_TYPE(UnknownColumn)
DPCM_ERROR_TYPE(NotFitted)

// learners
DPCM_ERROR_TYPE(SingleClass)
DPCM_ERROR_TYPE(NonFiniteLoss)
DPCM_ERROR_TYPE(WidthMismatch)

// credit_risk
DPCM_ERROR_TYPE(InvalidAmounts)
DPCM_ERROR_TYPE(OutOfRange)

// evaluation
DPCM_ERROR_TYPE(DivisionByZero)

// portable_model / io
DPCM_ERROR_TYPE(IoError)
DPCM_ERROR_TYPE(VersionMismatch)
DPCM_ERROR_TYPE(MalformedDocument)

#undef DPCM_ERROR_TYPE

}  // namespace dpcm
