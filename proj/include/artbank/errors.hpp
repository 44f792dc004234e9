#pragma once

#include <stdexcept>
#include <string>

namespace artbank {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or extent mismatch between operands.
struct DimensionError : Error {
  using Error::Error;
};

// NaN/Inf produced or consumed by an operation.
struct NumericError : Error {
  using Error::Error;
};

struct GradCheckError : NumericError {
  GradCheckError(const std::string& parameter, const std::string& what)
      : NumericError("grad_check failed for parameter '" + parameter + "': " + what),
        parameter_name(parameter) {}
  std::string parameter_name;
};

struct ConfigError : Error {
  using Error::Error;
};

struct ContractError : Error {
  using Error::Error;
};

struct TemplateError : Error {
  using Error::Error;
};

struct NotFoundError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Binary and image file decoding failures.
struct FormatError : Error {
  using Error::Error;
};
struct BadMagicError : FormatError {
  using FormatError::FormatError;
};
struct VersionError : FormatError {
  using FormatError::FormatError;
};
struct TruncatedError : FormatError {
  using FormatError::FormatError;
};
struct MalformedHeaderError : FormatError {
  using FormatError::FormatError;
};
struct UnsupportedFormatError : FormatError {
  using FormatError::FormatError;
};

}  // namespace artbank
