#pragma once

#include <stdexcept>
#include <string>

namespace aqua {

// Exit-code families: ConfigError -> 2, DataError -> 3, NumericError -> 4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : DataError {
  using DataError::DataError;
};
struct MissingBand : DataError {
  using DataError::DataError;
};
struct UnknownIndex : DataError {
  using DataError::DataError;
};
struct BadMagic : DataError {
  using DataError::DataError;
};
struct TruncatedFile : DataError {
  using DataError::DataError;
};
struct UnsupportedVersion : DataError {
  using DataError::DataError;
};
struct AllInvalid : DataError {
  using DataError::DataError;
};
struct EmptyInput : DataError {
  using DataError::DataError;
};
struct EmptyDataset : DataError {
  using DataError::DataError;
};
struct BadKernel : ConfigError {
  using ConfigError::ConfigError;
};
struct BadConfig : ConfigError {
  using ConfigError::ConfigError;
};
struct InfeasibleSpec : ConfigError {
  using ConfigError::ConfigError;
};
struct ParamCountMismatch : DataError {
  using DataError::DataError;
};
struct DivergenceDetected : NumericError {
  using NumericError::NumericError;
};

}  // namespace aqua
