#pragma once

#include <stdexcept>
#include <string>

namespace cdm {

/// Input file or manifest does not match the expected schema
/// (missing column, unparseable cell, malformed manifest).
class SchemaError : public std::runtime_error {
public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

/// A run configuration is internally inconsistent (e.g. a tuning
/// criterion that needs labels the dataset does not carry).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cdm
