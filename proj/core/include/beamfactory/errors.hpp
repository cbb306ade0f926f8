#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace beamfactory {

// Base for all library errors. Callers that only care about "something in
// beamfactory failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfLayoutError : public Error {
 public:
  using Error::Error;
};

class OutOfGridError : public Error {
 public:
  using Error::Error;
};

// Argument outside a function's mathematical domain (d < 1 m, undefined angle, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Raised while reading scenario files or CSV inputs. `where` is a field path
// ("routes[0].speed") or a "line N" locator.
class ConfigError : public Error {
 public:
  ConfigError(std::string where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace beamfactory
