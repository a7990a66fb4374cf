#pragma once

#include <stdexcept>
#include <string>

namespace nmfhmm {

// Base type for everything the library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// audio_io
struct MissingFile : Error { using Error::Error; };
struct UnsupportedEncoding : Error { using Error::Error; };
struct SampleRateMismatch : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };

// spectral
struct EmptyInput : Error { using Error::Error; };
struct ConfigMismatch : Error { using Error::Error; };

// matrix factorization
struct ShapeMismatch : Error { using Error::Error; };
struct NonPositiveEstimate : Error { using Error::Error; };
struct WeightOutOfRange : Error { using Error::Error; };

// markov chain machinery
struct NonPositiveRate : Error { using Error::Error; };
struct DegenerateChain : Error { using Error::Error; };
struct AllZeroPosterior : Error { using Error::Error; };
struct EmptyStatistics : Error { using Error::Error; };

// training / enhancement
struct DimensionMismatch : Error { using Error::Error; };
struct ModelDimensionMismatch : Error { using Error::Error; };

// model files
struct SchemaViolation : Error { using Error::Error; };
struct InvariantViolation : Error { using Error::Error; };

// metrics
struct LengthMismatch : Error { using Error::Error; };
struct RateMismatch : Error { using Error::Error; };

}  // namespace nmfhmm
