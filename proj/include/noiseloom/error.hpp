#pragma once

#include <stdexcept>
#include <string>

namespace noiseloom {

enum class ErrorKind {
  geometry,
  degenerate_input,
  invalid_permutation,
  invalid_pairing,
  config,
  guidance,
  ingest,
};

const char* to_string(ErrorKind kind);

// Base for every engine error. The CLI maps these to exit code 1 and the
// service to HTTP 409.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define NOISELOOM_DEFINE_ERROR(Name, Kind)                               \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

NOISELOOM_DEFINE_ERROR(GeometryError, geometry)
NOISELOOM_DEFINE_ERROR(DegenerateInputError, degenerate_input)
NOISELOOM_DEFINE_ERROR(InvalidPermutationError, invalid_permutation)
NOISELOOM_DEFINE_ERROR(InvalidPairingError, invalid_pairing)
NOISELOOM_DEFINE_ERROR(ConfigError, config)
NOISELOOM_DEFINE_ERROR(GuidanceError, guidance)
NOISELOOM_DEFINE_ERROR(IngestError, ingest)

#undef NOISELOOM_DEFINE_ERROR

}  // namespace noiseloom
