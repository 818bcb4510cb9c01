#include "reqtocode/error.hpp"

namespace reqtocode {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::transport: return "transport";
    case ErrorKind::schema: return "schema";
    case ErrorKind::unpartitioned: return "unpartitioned";
    case ErrorKind::ambiguous_partition: return "ambiguous-partition";
    case ErrorKind::config: return "config";
    case ErrorKind::resurrection: return "resurrection";
    case ErrorKind::collision: return "collision";
    case ErrorKind::placement: return "placement";
    case ErrorKind::foreign_file: return "foreign-file";
    case ErrorKind::revision: return "revision";
    case ErrorKind::path: return "path";
    case ErrorKind::repository: return "repository";
    case ErrorKind::usage: return "usage";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace reqtocode
