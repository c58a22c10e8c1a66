#pragma once

#include <stdexcept>
#include <string>

namespace remind {

enum class ErrorCode {
  Usage,              // bad configuration / flag values
  Shape,              // dimension mismatch
  Symmetry,           // input not symmetric within tolerance
  Convergence,        // iterative solver failed to converge
  NotPositiveDefinite,
  Weight,             // weights off the simplex
  Arity,              // empty input where at least one element is required
  DegenerateMap,      // rank-deficient linear map
  Parameter,          // parameter out of its documented range
  DegenerateChannel,  // zero-variance channel in correlation
  Segmentation,       // segment length too short
  Stratification,     // a class absent from a stratified sample
  Data,               // dataset-level problem (empty, missing labels, ...)
  Numeric,            // non-finite value produced
  Io,                 // file read/write failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

const char* error_code_name(ErrorCode code);

}  // namespace remind
