#pragma once

#include <stdexcept>
#include <string>

namespace uuaudit {

// Base for every error raised by the library. Callers that only need to
// report a failure can catch this; the subclasses let the CLI and the
// service map failures onto exit codes and HTTP statuses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file does not declare a required column.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A value violates a documented bound (confidence outside [0,1], duplicate
// id, non-finite number).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Vector or matrix shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// A SearchState or trace refers to points the TestSet does not contain.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// A candidate that has already been queried was offered again.
class ReuseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace uuaudit
