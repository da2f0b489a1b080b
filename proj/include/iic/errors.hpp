#pragma once

#include <stdexcept>
#include <string>

namespace iic {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyDataset : Error { using Error::Error; };
struct MissingModality : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct InvalidWindow : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct SchemaMismatch : Error { using Error::Error; };
struct NonPositiveHeartRate : Error { using Error::Error; };
struct WeightOutOfRange : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct DivergenceDetected : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };
struct KTooLarge : Error { using Error::Error; };
struct TooManyFeatures : Error { using Error::Error; };
struct EmptyEval : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };
struct MissingInput : Error { using Error::Error; };

} // namespace iic
