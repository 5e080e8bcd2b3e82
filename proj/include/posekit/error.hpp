#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace posekit {

enum class ErrorCode {
  CycleDetected,
  MultipleRoots,
  OrphanJoint,
  IndexOutOfRange,
  ShapeMismatch,
  InsufficientData,
  MixedDims,
  StatsMismatch,
  KinkProximity,
  DegenerateConfiguration,
  InsufficientSamplesForSubject,
  ZeroLengthBone,
  NonPositiveDepth,
  InvalidIntrinsics,
  InvalidConfig,
  DivergenceDetected,
  MalformedInput,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::MultipleRoots: return "MultipleRoots";
    case ErrorCode::OrphanJoint: return "OrphanJoint";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::MixedDims: return "MixedDims";
    case ErrorCode::StatsMismatch: return "StatsMismatch";
    case ErrorCode::KinkProximity: return "KinkProximity";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::InsufficientSamplesForSubject: return "InsufficientSamplesForSubject";
    case ErrorCode::ZeroLengthBone: return "ZeroLengthBone";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::InvalidIntrinsics: return "InvalidIntrinsics";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::MalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace posekit
