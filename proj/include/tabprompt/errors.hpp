#pragma once

#include <stdexcept>
#include <string>

namespace tabprompt {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclass to an exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CSV, schema, gold labels).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration. `field` names the offending config path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A remote service could not be reached or answered with garbage.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// A numeric or model-level failure (non-finite gradients, shape mismatch).
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace tabprompt
