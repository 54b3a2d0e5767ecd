#pragma once

#include <stdexcept>
#include <string>

namespace gdyne {

enum class ErrorKind {
  InvalidParameter,
  EtaZero,
  OutsidePhase,
  AngleOutOfRange,
  SingularSylvester,
  StepTooLarge,
  NotConverged,
  DegenerateSpectrum,
  OnBoundary,
  QuadratureError,
  TruncationError,
  StencilUnstable,
  ImaginaryResidue,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::EtaZero: return "EtaZero";
    case ErrorKind::OutsidePhase: return "OutsidePhase";
    case ErrorKind::AngleOutOfRange: return "AngleOutOfRange";
    case ErrorKind::SingularSylvester: return "SingularSylvester";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::OnBoundary: return "OnBoundary";
    case ErrorKind::QuadratureError: return "QuadratureError";
    case ErrorKind::TruncationError: return "TruncationError";
    case ErrorKind::StencilUnstable: return "StencilUnstable";
    case ErrorKind::ImaginaryResidue: return "ImaginaryResidue";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gdyne
