#include "ipi/error.hpp"

namespace ipi {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::RowSum: return "RowSumError";
    case ErrorKind::NegativeProbability: return "NegativeProbability";
    case ErrorKind::GammaOutOfRange: return "GammaOutOfRange";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::DuplicateTransition: return "DuplicateTransition";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::FactorizationFailure: return "FactorizationFailure";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::EigensolveFailure: return "EigensolveFailure";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::OptimalityViolation: return "OptimalityViolation";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Io: return "IoError";
  }
  return "UnknownError";
}

}  // namespace ipi
