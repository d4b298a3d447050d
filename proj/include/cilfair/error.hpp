#pragma once

#include <stdexcept>
#include <string>

namespace cilfair {

// Error taxonomy shared by the whole library. The CLI maps ParamError and
// ParseError to exit code 2 (bad configuration) and everything else to 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An argument value outside its documented domain (negative count, rate >= 1, ...).
struct ParamError : Error {
  using Error::Error;
};

// Rejected input data: shape mismatch, out-of-range label, non-distribution vector.
struct InputError : Error {
  using Error::Error;
};

// A broken caller contract, e.g. a backward() call with a stale forward cache.
struct ContractError : Error {
  using Error::Error;
};

// Malformed file content; message carries the offending line or field.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace cilfair
