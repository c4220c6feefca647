#ifndef TEXTAUG_ERROR_HPP
#define TEXTAUG_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace textaug {

// Base error for all library failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Bad or missing configuration (flags, env vars, credentials).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(message) {}
};

// External-provider failure. `completed` marks how much partial progress the
// failed operation made, so callers can resume or report it.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& message, std::size_t completed = 0)
      : Error(message), completed_(completed) {}
  std::size_t completed() const { return completed_; }

 private:
  std::size_t completed_;
};

}  // namespace textaug

#endif  // TEXTAUG_ERROR_HPP
