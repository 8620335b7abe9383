#include "infodense/errors.hpp"

namespace infodense {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::contract: return "contract";
    case ErrorKind::schema: return "schema";
    case ErrorKind::config: return "config";
    case ErrorKind::missing_sensor: return "missing-sensor";
    case ErrorKind::empty_result: return "empty-result";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, std::string(to_string(kind)) + " error: " + message);
}

}  // namespace infodense
