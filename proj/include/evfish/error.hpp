#pragma once

#include <stdexcept>
#include <string>

namespace evfish {

/// Base class for every error raised by the library. Each subclass names one
/// failure class so callers (and tests) can catch precisely.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define EVFISH_DEFINE_ERROR(Name)                \
  class Name : public Error {                    \
  public:                                        \
    using Error::Error;                          \
  };

// event_io
EVFISH_DEFINE_ERROR(BadMagic)
EVFISH_DEFINE_ERROR(TruncatedRecord)
EVFISH_DEFINE_ERROR(CoordOutOfRange)
EVFISH_DEFINE_ERROR(TimestampRegression)
EVFISH_DEFINE_ERROR(InvariantViolation)
EVFISH_DEFINE_ERROR(ParseError)

// preprocess
EVFISH_DEFINE_ERROR(NonPositiveDuration)
EVFISH_DEFINE_ERROR(GeometryMismatch)
EVFISH_DEFINE_ERROR(NonConvergence)

// framing / detect
EVFISH_DEFINE_ERROR(EventOutOfWindow)
EVFISH_DEFINE_ERROR(NegativeExtent)

// track / count / eval
EVFISH_DEFINE_ERROR(SingularInnovationCovariance)
EVFISH_DEFINE_ERROR(InsufficientFrames)
EVFISH_DEFINE_ERROR(EmptyGroundTruth)
EVFISH_DEFINE_ERROR(NonPositiveTruth)

// simgen / config
EVFISH_DEFINE_ERROR(UnknownFishId)
EVFISH_DEFINE_ERROR(ConfigError)

#undef EVFISH_DEFINE_ERROR

}  // namespace evfish
