#pragma once

#include <span>
#include <string_view>

namespace reqtocode::detail {

struct EmbeddedFile {
  std::string_view path;  // "<profile>/<file>"
  std::string_view content;
};

// Defined in the build-generated builtin_profiles.cpp.
std::span<const EmbeddedFile> builtin_profile_files();

}  // namespace reqtocode::detail
