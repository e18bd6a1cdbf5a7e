#pragma once

#include <stdexcept>
#include <string>

namespace mapwh {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract serialized input. `path` points at the
// offending JSON element, e.g. "components[0].jumps_pos.terms[1].beta".
struct SchemaError : Error {
  SchemaError(std::string path_, const std::string& msg)
      : Error(path_ + ": " + msg), path(std::move(path_)) {}
  std::string path;
};

// A constructed measure or spec violates a structural invariant.
struct ValidationError : Error {
  using Error::Error;
};

}  // namespace mapwh
