#include "reqtocode/glob.hpp"

namespace reqtocode {

bool match_glob(std::string_view pattern, std::string_view text) {
  while (!pattern.empty()) {
    if (pattern.starts_with("**")) {
      pattern.remove_prefix(2);
      if (!pattern.empty() && pattern.front() == '/') {
        const std::string_view rest = pattern.substr(1);
        if (match_glob(rest, text)) return true;
        for (std::size_t i = 0; i < text.size(); ++i) {
          if (text[i] == '/' && match_glob(rest, text.substr(i + 1))) {
            return true;
          }
        }
        return false;
      }
      for (std::size_t i = 0; i <= text.size(); ++i) {
        if (match_glob(pattern, text.substr(i))) return true;
      }
      return false;
    }
    const char c = pattern.front();
    if (c == '*') {
      pattern.remove_prefix(1);
      for (std::size_t i = 0;; ++i) {
        if (match_glob(pattern, text.substr(i))) return true;
        if (i == text.size() || text[i] == '/') return false;
      }
    }
    if (text.empty()) return false;
    if (c == '?') {
      if (text.front() == '/') return false;
    } else if (c != text.front()) {
      return false;
    }
    pattern.remove_prefix(1);
    text.remove_prefix(1);
  }
  return text.empty();
}

bool match_path_glob(std::string_view pattern, std::string_view path) {
  if (pattern.find('/') == std::string_view::npos) {
    const auto slash = path.rfind('/');
    if (slash != std::string_view::npos) path.remove_prefix(slash + 1);
  }
  return match_glob(pattern, path);
}

bool match_any_path_glob(std::span<const std::string> patterns,
                         std::string_view path) {
  for (const auto& p : patterns) {
    if (match_path_glob(p, path)) return true;
  }
  return false;
}

}  // namespace reqtocode
