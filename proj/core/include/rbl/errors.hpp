#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace rbl {

enum class ErrorCode {
  DegenerateGeometry,
  ArgOutOfRange,
  AngleSingularity,
  InvalidParameter,
  OutOfSupport,
  UnresolvedIntensity,
  SingularFim,
  ZeroTrace,
  NotRotation,
  SingularProjectedFim,
  RankDeficient,
  DegenerateConformation,
  ParseError,
  ValidationError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::ArgOutOfRange: return "ArgOutOfRange";
    case ErrorCode::AngleSingularity: return "AngleSingularity";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::UnresolvedIntensity: return "UnresolvedIntensity";
    case ErrorCode::SingularFim: return "SingularFim";
    case ErrorCode::ZeroTrace: return "ZeroTrace";
    case ErrorCode::NotRotation: return "NotRotation";
    case ErrorCode::SingularProjectedFim: return "SingularProjectedFim";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DegenerateConformation: return "DegenerateConformation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// Thrown when a Fisher matrix cannot be inverted; carries an orthonormal
/// basis of the unobservable directions (columns).
class SingularFimError : public Error {
 public:
  SingularFimError(const std::string& message, Eigen::MatrixXd null_space)
      : Error(ErrorCode::SingularFim, message),
        null_space_(std::move(null_space)) {}

  const Eigen::MatrixXd& null_space() const { return null_space_; }

 private:
  Eigen::MatrixXd null_space_;
};

}  // namespace rbl
