#include "noiseloom/error.hpp"

namespace noiseloom {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::geometry: return "geometry error";
    case ErrorKind::degenerate_input: return "degenerate input";
    case ErrorKind::invalid_permutation: return "invalid permutation";
    case ErrorKind::invalid_pairing: return "invalid pairing";
    case ErrorKind::config: return "config error";
    case ErrorKind::guidance: return "guidance error";
    case ErrorKind::ingest: return "ingest error";
  }
  return "error";
}

}  // namespace noiseloom
