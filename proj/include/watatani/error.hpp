#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace watatani {

enum class ErrorKind {
  FieldMismatch,
  DivisionByZero,
  InvalidField,
  LevelTooSmall,
  CostGuard,
  DegenerateTrace,
  NotSubalgebra,
  NoQuasiBasis,
  NonCentralIndex,
  CocycleViolation,
  NotProjection,
  NotPositive,
  NotAction,
  StrandMismatch,
  DirectSumFailure,
  NotInB,
  BadBase,
  InvalidArgument,
  ParseError,
  UndeclaredIdentifier,
  DuplicateIdentifier,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::FieldMismatch: return "FieldMismatch";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::InvalidField: return "InvalidField";
    case ErrorKind::LevelTooSmall: return "LevelTooSmall";
    case ErrorKind::CostGuard: return "CostGuard";
    case ErrorKind::DegenerateTrace: return "DegenerateTrace";
    case ErrorKind::NotSubalgebra: return "NotSubalgebra";
    case ErrorKind::NoQuasiBasis: return "NoQuasiBasis";
    case ErrorKind::NonCentralIndex: return "NonCentralIndex";
    case ErrorKind::CocycleViolation: return "CocycleViolation";
    case ErrorKind::NotProjection: return "NotProjection";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::NotAction: return "NotAction";
    case ErrorKind::StrandMismatch: return "StrandMismatch";
    case ErrorKind::DirectSumFailure: return "DirectSumFailure";
    case ErrorKind::NotInB: return "NotInB";
    case ErrorKind::BadBase: return "BadBase";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UndeclaredIdentifier: return "UndeclaredIdentifier";
    case ErrorKind::DuplicateIdentifier: return "DuplicateIdentifier";
  }
  return "Unknown";
}

/// Base exception for every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace watatani
