#pragma once

#include <stdexcept>
#include <string>

namespace mhc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MHC_DEFINE_ERROR(Name)            \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

MHC_DEFINE_ERROR(DegenerateRotation);
MHC_DEFINE_ERROR(NotARotation);
MHC_DEFINE_ERROR(SchemaError);
MHC_DEFINE_ERROR(InvalidSkeleton);
MHC_DEFINE_ERROR(InvalidClip);
MHC_DEFINE_ERROR(ClipTooShort);
MHC_DEFINE_ERROR(EmptyBank);
MHC_DEFINE_ERROR(DatasetTooSmall);
MHC_DEFINE_ERROR(InvalidDirective);
MHC_DEFINE_ERROR(NumericalDivergence);
MHC_DEFINE_ERROR(NonFiniteLoss);
MHC_DEFINE_ERROR(ShapeMismatch);
MHC_DEFINE_ERROR(LengthMismatch);
MHC_DEFINE_ERROR(NoSelectedJoints);
MHC_DEFINE_ERROR(InsufficientData);
MHC_DEFINE_ERROR(NoConvergence);
MHC_DEFINE_ERROR(PortInUse);
MHC_DEFINE_ERROR(ProtocolError);

#undef MHC_DEFINE_ERROR

}  // namespace mhc
