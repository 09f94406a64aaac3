#pragma once

#include <stdexcept>
#include <string>

namespace xlel {

// Invalid configuration or arguments; detected before any stage does work.
// The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure while processing data (I/O, truncated dumps, schema violations).
// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void throw_config(const std::string& what);
[[noreturn]] void throw_data(const std::string& what);

}  // namespace xlel
