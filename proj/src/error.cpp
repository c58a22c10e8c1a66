#include "remind/error.hpp"

namespace remind {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage: return "usage";
    case ErrorCode::Shape: return "shape";
    case ErrorCode::Symmetry: return "symmetry";
    case ErrorCode::Convergence: return "convergence";
    case ErrorCode::NotPositiveDefinite: return "not-positive-definite";
    case ErrorCode::Weight: return "weight";
    case ErrorCode::Arity: return "arity";
    case ErrorCode::DegenerateMap: return "degenerate-map";
    case ErrorCode::Parameter: return "parameter";
    case ErrorCode::DegenerateChannel: return "degenerate-channel";
    case ErrorCode::Segmentation: return "segmentation";
    case ErrorCode::Stratification: return "stratification";
    case ErrorCode::Data: return "data";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace remind
