#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slicearena {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A mean-delay query on a queue whose per-server load is not below its service rate.
class UnstableQueueError : public Error {
public:
  using Error::Error;
};

/// No finite VNF count can meet the delay budget (service rate <= 2 / budget).
class InfeasibleBudgetError : public Error {
public:
  using Error::Error;
};

/// Configuration or argument failed validation. `field()` names the offending key.
class ValidationError : public Error {
public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class NoPendingRequest : public Error {
public:
  using Error::Error;
};

class InstanceTooLarge : public Error {
public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
public:
  using Error::Error;
};

class QualityGateError : public Error {
public:
  QualityGateError(std::size_t member, const std::string& message)
      : Error("ensemble member " + std::to_string(member) + ": " + message), member_(member) {}

  std::size_t member() const noexcept { return member_; }

private:
  std::size_t member_;
};

class MissingCheckpoint : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace slicearena
