#pragma once

#include <stdexcept>
#include <string>

namespace trafoid {

enum class ErrorKind
{
  config,
  domain,
  identification,
  numerical,
  io,
  verification
};

//! Base of every exception thrown by the library. The kind drives the CLI
//! exit code.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what)
    , kind_(kind)
  {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

struct ConfigError : Error
{
  explicit ConfigError(const std::string& what)
    : Error(ErrorKind::config, what)
  {}
};

//! Argument outside the mathematical domain (sigma <= 0, bad index, ...).
struct DomainError : Error
{
  explicit DomainError(const std::string& what)
    : Error(ErrorKind::domain, what)
  {}
};

//! The data do not support identification: B = 0, no root of lambda,
//! vanishing y-density.
struct IdentificationError : Error
{
  explicit IdentificationError(const std::string& what)
    : Error(ErrorKind::identification, what)
  {}
};

//! Quadrature, root bracketing, limit extrapolation or ODE failures.
struct NumericalError : Error
{
  explicit NumericalError(const std::string& what)
    : Error(ErrorKind::numerical, what)
  {}
};

struct IoError : Error
{
  explicit IoError(const std::string& what)
    : Error(ErrorKind::io, what)
  {}
};

//! A verification probe found a violated property.
struct VerificationError : Error
{
  explicit VerificationError(const std::string& what)
    : Error(ErrorKind::verification, what)
  {}
};

} // namespace trafoid
