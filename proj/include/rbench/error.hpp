#pragma once

#include <stdexcept>
#include <string>

namespace rbench {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Clock misbehaved during calibration (non-monotonic reads, no observable tick).
class CalibrationError : public Error {
public:
  using Error::Error;
};

// Invalid user-supplied configuration: timer specs, oracle specs, suites, CLI values.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

// Every tuning ramp point measured zero time.
class DegenerateBenchmarkError : public Error {
public:
  using Error::Error;
};

class PersistenceError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class BudgetExhaustedError : public Error {
public:
  using Error::Error;
};

class ExecutorError : public Error {
public:
  using Error::Error;
};

}  // namespace rbench
