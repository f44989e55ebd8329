#include "wave/error.hpp"

namespace wave {

char const *to_string(ErrorKind kind) noexcept {
  switch (kind) {
  case ErrorKind::InvalidArgument: return "invalid_argument";
  case ErrorKind::InvalidConfig: return "invalid_config";
  case ErrorKind::SlewViolation: return "slew_violation";
  case ErrorKind::Divergence: return "divergence";
  case ErrorKind::Io: return "io";
  }
  return "unknown";
}

} // namespace wave
