#pragma once

#include <stdexcept>
#include <string>

namespace qdist {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document (JSON, GML, LP text, cache file).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of a closed-form model.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration of a builder, solver or experiment.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qdist
