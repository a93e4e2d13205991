#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

/// Base class for every error raised by this library. Each concrete type
/// corresponds to one failure mode so callers can catch them selectively.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// grid / volume
struct InvalidGrid : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct SpacingMismatch : Error { using Error::Error; };
struct ValueOutOfRange : Error { using Error::Error; };

// nifti / files
struct MalformedHeader : Error { using Error::Error; };
struct UnsupportedDatatype : Error { using Error::Error; };
struct DimensionUnsupported : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };

// config
struct UnknownKey : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct ParseFailure : Error { using Error::Error; };

// labeling / anatomy
struct TooManyComponents : Error { using Error::Error; };
struct UnknownLabel : Error { using Error::Error; };
struct EmptyLungMask : Error { using Error::Error; };

// roi
struct BoxMismatch : Error { using Error::Error; };

// uncertainty
struct TooFewSamples : Error { using Error::Error; };
struct NegativeUncertainty : Error { using Error::Error; };

// metrics / statistics
struct LengthMismatch : Error { using Error::Error; };
struct DegenerateVariance : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };

// phantom
struct SpecInfeasible : Error { using Error::Error; };

// pipeline
struct MissingRoiPrediction : Error { using Error::Error; };
struct MissingGroundTruth : Error { using Error::Error; };

}  // namespace cascade
