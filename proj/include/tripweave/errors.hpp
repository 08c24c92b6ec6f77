#pragma once

#include <stdexcept>
#include <string>

namespace tripweave {

// Bad configuration: missing files, malformed schema, invalid parameter combinations.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Input data that cannot be handled row-locally (empty datasets, missing centroids, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tripweave
