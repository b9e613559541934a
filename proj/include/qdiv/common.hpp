#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace qdiv {

using cxd = std::complex<double>;

/// Default tolerances. Stated once here; every other header refers to these.
namespace tol {
inline constexpr double herm = 1e-10;      // hermiticity check, scaled by max|entry|
inline constexpr double eig = 1e-9;        // eigendecomposition residuals
inline constexpr double tp = 1e-9;         // trace preservation
inline constexpr double cp = 1e-9;         // min Choi eigenvalue
inline constexpr double rank = 1e-8;       // singular value cutoff, relative to largest
inline constexpr double backflow = 1e-7;   // sigma threshold separating noise from backflow
inline constexpr double quadrature = 1e-10;
}  // namespace tol

enum class ErrorCode {
  NonHermitianInput,
  DimensionOverflow,
  DimensionMismatch,
  SingularMatrix,
  EmptyKrausList,
  InvalidTP,
  RateBlowUp,
  QuadratureFailure,
  DegenerateTime,
  GeneratorSingular,
  RateBlowUpInsideStep,
  NonTPDrift,
  NotDivisible,
  NotStochasticInput,
  OffGridTime,
  StepTooSmall,
  DegenerateSpan,
  NotThreeDimensional,
  NotDensitySpanned,
  IoFailure,
  UnknownKey,
  BadValue,
  MissingRequired,
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonHermitianInput: return "NonHermitianInput";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::EmptyKrausList: return "EmptyKrausList";
    case ErrorCode::InvalidTP: return "InvalidTP";
    case ErrorCode::RateBlowUp: return "RateBlowUp";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::DegenerateTime: return "DegenerateTime";
    case ErrorCode::GeneratorSingular: return "GeneratorSingular";
    case ErrorCode::RateBlowUpInsideStep: return "RateBlowUpInsideStep";
    case ErrorCode::NonTPDrift: return "NonTPDrift";
    case ErrorCode::NotDivisible: return "NotDivisible";
    case ErrorCode::NotStochasticInput: return "NotStochasticInput";
    case ErrorCode::OffGridTime: return "OffGridTime";
    case ErrorCode::StepTooSmall: return "StepTooSmall";
    case ErrorCode::DegenerateSpan: return "DegenerateSpan";
    case ErrorCode::NotThreeDimensional: return "NotThreeDimensional";
    case ErrorCode::NotDensitySpanned: return "NotDensitySpanned";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::BadValue: return "BadValue";
    case ErrorCode::MissingRequired: return "MissingRequired";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

/// splitmix64; used to derive per-sample RNG seeds so that sample i sees the
/// same stream no matter how many samples run or in which order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace qdiv
