#include "klframe/error.hpp"

namespace klframe {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NonSquare:
      return "NonSquare";
    case Errc::NotSymmetric:
      return "NotSymmetric";
    case Errc::NoConvergence:
      return "NoConvergence";
    case Errc::ZeroDim:
      return "ZeroDim";
    case Errc::DimMismatch:
      return "DimMismatch";
    case Errc::NonFinite:
      return "NonFinite";
    case Errc::Singular:
      return "Singular";
    case Errc::EmptyFrame:
      return "EmptyFrame";
    case Errc::ZeroVector:
      return "ZeroVector";
    case Errc::LengthMismatch:
      return "LengthMismatch";
    case Errc::SingularFrameOperator:
      return "SingularFrameOperator";
    case Errc::NotSpanning:
      return "NotSpanning";
    case Errc::NotAProjection:
      return "NotAProjection";
    case Errc::NotUnitVector:
      return "NotUnitVector";
    case Errc::IndexOutOfRange:
      return "IndexOutOfRange";
    case Errc::SpectrumOutOfRange:
      return "SpectrumOutOfRange";
    case Errc::NotPSD:
      return "NotPSD";
    case Errc::NegativeWeight:
      return "NegativeWeight";
    case Errc::NotOrthonormal:
      return "NotOrthonormal";
    case Errc::BadRange:
      return "BadRange";
    case Errc::NotNormalized:
      return "NotNormalized";
    case Errc::NotUnitWeights:
      return "NotUnitWeights";
    case Errc::BadKernel:
      return "BadKernel";
    case Errc::NoDominantGap:
      return "NoDominantGap";
    case Errc::MaxIterExceeded:
      return "MaxIterExceeded";
    case Errc::ZeroOperator:
      return "ZeroOperator";
    case Errc::NotLeftEigenvector:
      return "NotLeftEigenvector";
    case Errc::OddDimensions:
      return "OddDimensions";
    case Errc::MalformedLayout:
      return "MalformedLayout";
    case Errc::TooManyLevels:
      return "TooManyLevels";
    case Errc::NegativeLambda:
      return "NegativeLambda";
    case Errc::NonPositiveStep:
      return "NonPositiveStep";
    case Errc::EmptyModel:
      return "EmptyModel";
    case Errc::BadProbabilities:
      return "BadProbabilities";
    case Errc::UnknownSymbol:
      return "UnknownSymbol";
    case Errc::DanglingBits:
      return "DanglingBits";
    case Errc::ExcessBits:
      return "ExcessBits";
    case Errc::CodeTooLong:
      return "CodeTooLong";
    case Errc::BadMagic:
      return "BadMagic";
    case Errc::TruncatedFile:
      return "TruncatedFile";
    case Errc::UnsupportedMaxval:
      return "UnsupportedMaxval";
    case Errc::TooFewBlocks:
      return "TooFewBlocks";
    case Errc::KTooLarge:
      return "KTooLarge";
    case Errc::ConfigInvalid:
      return "ConfigInvalid";
    case Errc::CorruptContainer:
      return "CorruptContainer";
    case Errc::VersionMismatch:
      return "VersionMismatch";
    case Errc::ParseError:
      return "ParseError";
    case Errc::Io:
      return "Io";
  }
  return "Unknown";
}

}  // namespace klframe
