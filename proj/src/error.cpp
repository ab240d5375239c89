#include "srisk/error.hpp"

namespace srisk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OverflowGuard: return "OverflowGuard";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::BracketNotFound: return "BracketNotFound";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::InvalidStart: return "InvalidStart";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace srisk
