#pragma once

#include <stdexcept>
#include <string>

namespace posecast {

// Error categories map 1:1 onto CLI exit codes (config=2, data=3, numeric=4).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid parameters, configs, or call contracts.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Malformed or inconsistent input data (files, corpora, shapes).
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Numerical failure: divergence, non-finite values, singular systems.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace posecast
