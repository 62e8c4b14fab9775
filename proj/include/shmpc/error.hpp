#pragma once

#include <stdexcept>
#include <string>

namespace shmpc {

enum class ErrorKind {
  EmptyResult,
  UnboundedSupport,
  Unbounded,
  DimMismatch,
  NoConvergence,
  InvalidSplit,
  NoSplittable,
  HorizonExhausted,
  MissingStage,
  Infeasible,
  MaxIterations,
  SamplingExhausted,
  InvalidArgument,
  Io,
};

const char* to_string(ErrorKind kind);

/// Library-wide exception; `kind()` lets callers branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyResult: return "EmptyResult";
    case ErrorKind::UnboundedSupport: return "UnboundedSupport";
    case ErrorKind::Unbounded: return "Unbounded";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InvalidSplit: return "InvalidSplit";
    case ErrorKind::NoSplittable: return "NoSplittable";
    case ErrorKind::HorizonExhausted: return "HorizonExhausted";
    case ErrorKind::MissingStage: return "MissingStage";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::SamplingExhausted: return "SamplingExhausted";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace shmpc
