#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace klframe {

enum class Errc {
  // linalg-core
  NonSquare,
  NotSymmetric,
  NoConvergence,
  ZeroDim,
  DimMismatch,
  NonFinite,
  Singular,
  // frames
  EmptyFrame,
  ZeroVector,
  LengthMismatch,
  SingularFrameOperator,
  NotSpanning,
  NotAProjection,
  NotUnitVector,
  IndexOutOfRange,
  SpectrumOutOfRange,
  NotPSD,
  NegativeWeight,
  // kl-analysis
  NotOrthonormal,
  BadRange,
  NotNormalized,
  NotUnitWeights,
  BadKernel,
  // splitoff
  NoDominantGap,
  MaxIterExceeded,
  ZeroOperator,
  NotLeftEigenvector,
  // wavelet
  OddDimensions,
  MalformedLayout,
  TooManyLevels,
  // coding
  NegativeLambda,
  NonPositiveStep,
  EmptyModel,
  BadProbabilities,
  UnknownSymbol,
  DanglingBits,
  ExcessBits,
  CodeTooLong,
  // pipeline
  BadMagic,
  TruncatedFile,
  UnsupportedMaxval,
  TooFewBlocks,
  KTooLarge,
  ConfigInvalid,
  CorruptContainer,
  VersionMismatch,
  ParseError,
  Io,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library. `code()` identifies the contract that
/// was violated; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

  /// Failures of the filesystem itself, as opposed to malformed content.
  bool is_io() const noexcept { return code_ == Errc::Io; }

 private:
  Errc code_;
};

}  // namespace klframe
