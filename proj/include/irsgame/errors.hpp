#pragma once

#include <stdexcept>
#include <string>

namespace irsgame {

/// Base class for every error the library raises. `exit_code()` is the
/// process status the CLI reports for this category.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 2; }
};

/// Invalid or incomplete scenario description. Messages start with the
/// offending field path, e.g. `sps[0].irs.modules: ...`.
class ConfigError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

class IoError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

/// Argument outside the mathematical domain of an operation (d <= 0, p_g <= 0).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Vector/matrix dimensions disagree.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Non-finite inputs, or integration drifting off the simplex.
class NumericError : public Error {
public:
  using Error::Error;
};

/// An iteration or integration that was required to converge did not.
class NonConvergenceError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// Requested quantity is only defined for a restricted class of scenarios.
class UnsupportedSettingError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

}  // namespace irsgame
