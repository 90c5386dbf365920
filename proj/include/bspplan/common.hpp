#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bspplan {

using Rng = std::mt19937_64;

enum class ErrorKind {
  InvalidGeometry,
  DegenerateWorkspace,
  EvenResolution,
  StartOrGoalInCollision,
  NoPath,
  DimensionMismatch,
  Unreachable,
  InvalidParams,
  NoForwardRecorded,
  EmptyDataset,
  TrainingDiverged,
  NoTermination,
  PointOutOfBounds,
  GenerationFailed,
  Infeasible,
  InsufficientData,
  BadWeights,
  MissingModel,
  IoFailure,
  BadInput,
};

std::string_view to_string(ErrorKind kind);

/// Every failure surfaced by the library carries a kind so the CLI can map it
/// to an exit code and tests can match on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidGeometry: return "InvalidGeometry";
    case ErrorKind::DegenerateWorkspace: return "DegenerateWorkspace";
    case ErrorKind::EvenResolution: return "EvenResolution";
    case ErrorKind::StartOrGoalInCollision: return "StartOrGoalInCollision";
    case ErrorKind::NoPath: return "NoPath";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::Unreachable: return "Unreachable";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::NoForwardRecorded: return "NoForwardRecorded";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::TrainingDiverged: return "TrainingDiverged";
    case ErrorKind::NoTermination: return "NoTermination";
    case ErrorKind::PointOutOfBounds: return "PointOutOfBounds";
    case ErrorKind::GenerationFailed: return "GenerationFailed";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::BadWeights: return "BadWeights";
    case ErrorKind::MissingModel: return "MissingModel";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::BadInput: return "BadInput";
  }
  return "Unknown";
}

/// Derives an independent stream seed from a base seed and a stream index
/// (splitmix64 finalizer), so fan-out work units never share RNG state.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

}  // namespace bspplan
