#pragma once

#include <stdexcept>
#include <string>

namespace gcmax {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GCMAX_DEFINE_ERROR(Name)      \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  }

GCMAX_DEFINE_ERROR(InvalidArgument);
GCMAX_DEFINE_ERROR(NotPsd);
GCMAX_DEFINE_ERROR(IndexError);
GCMAX_DEFINE_ERROR(DimMismatch);
GCMAX_DEFINE_ERROR(NonFinite);
GCMAX_DEFINE_ERROR(AssumptionViolated);
GCMAX_DEFINE_ERROR(RhoOutOfRange);
GCMAX_DEFINE_ERROR(UnsupportedFunctional);
GCMAX_DEFINE_ERROR(DegenerateWeights);
GCMAX_DEFINE_ERROR(ProjectionStalled);
GCMAX_DEFINE_ERROR(UsageError);
GCMAX_DEFINE_ERROR(IoError);

#undef GCMAX_DEFINE_ERROR

}  // namespace gcmax
