#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace reqtocode {

enum class ErrorKind {
  parse,
  validation,
  transport,
  schema,
  unpartitioned,
  ambiguous_partition,
  config,
  resurrection,
  collision,
  placement,
  foreign_file,
  revision,
  path,
  repository,
  usage,
  io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure the pipeline reports to callers. The kind decides how the
/// CLI maps it onto an exit status; the message is meant for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Collects non-fatal findings (clock skew, unreadable files, name
/// fallbacks). Not thread-safe; parallel stages merge per-worker copies.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  void merge(Diagnostics&& other) {
    for (auto& w : other.warnings) warnings.push_back(std::move(w));
  }
};

inline void warn(Diagnostics* diag, std::string message) {
  if (diag != nullptr) diag->warn(std::move(message));
}

}  // namespace reqtocode
