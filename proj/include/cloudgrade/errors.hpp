#pragma once

#include <stdexcept>
#include <string>

namespace cloudgrade {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CLOUDGRADE_DEFINE_ERROR(NAME)       \
  class NAME : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

CLOUDGRADE_DEFINE_ERROR(EmptyCloud);
CLOUDGRADE_DEFINE_ERROR(InvalidRadius);
CLOUDGRADE_DEFINE_ERROR(InvalidSpacing);
CLOUDGRADE_DEFINE_ERROR(DegenerateGeometry);
CLOUDGRADE_DEFINE_ERROR(EmptyStableArea);
CLOUDGRADE_DEFINE_ERROR(UnknownFeature);
CLOUDGRADE_DEFINE_ERROR(FeatureMismatch);
CLOUDGRADE_DEFINE_ERROR(EmptyInput);
CLOUDGRADE_DEFINE_ERROR(DegenerateClusters);
CLOUDGRADE_DEFINE_ERROR(EmptyBuilding);
CLOUDGRADE_DEFINE_ERROR(EmptyClass);
CLOUDGRADE_DEFINE_ERROR(InvalidDamageParams);
CLOUDGRADE_DEFINE_ERROR(InvalidOverlap);
CLOUDGRADE_DEFINE_ERROR(LengthMismatch);
CLOUDGRADE_DEFINE_ERROR(ParseError);
CLOUDGRADE_DEFINE_ERROR(UnsupportedVersion);
CLOUDGRADE_DEFINE_ERROR(ConfigError);
CLOUDGRADE_DEFINE_ERROR(MissingArtifact);
CLOUDGRADE_DEFINE_ERROR(IoError);

#undef CLOUDGRADE_DEFINE_ERROR

}  // namespace cloudgrade
