#pragma once

#include <span>
#include <string>
#include <string_view>

namespace reqtocode {

// `*` and `?` never cross a `/`; `**` matches any run of characters, and
// `**/` also matches zero directories.
bool match_glob(std::string_view pattern, std::string_view text);

// Like match_glob, but a pattern without any `/` is matched against the
// final path component only (gitignore convention).
bool match_path_glob(std::string_view pattern, std::string_view path);

bool match_any_path_glob(std::span<const std::string> patterns,
                         std::string_view path);

}  // namespace reqtocode
