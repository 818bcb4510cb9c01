#include "reqtocode/naming.hpp"

#include <fmt/format.h>

#include <set>

namespace reqtocode {
namespace {

bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

std::string strip_trailing_underscores(std::string s) {
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

std::string truncate_name(const std::string& full, std::size_t id_length,
                          std::size_t max_length) {
  if (full.size() <= max_length) return full;
  // Cut before the last word boundary that still keeps one title word.
  for (std::size_t cut = max_length; cut > id_length; --cut) {
    if (full[cut] == '_') return full.substr(0, cut);
  }
  if (id_length <= max_length) return full.substr(0, id_length);
  return strip_trailing_underscores(full.substr(0, max_length));
}

}  // namespace

std::string normalize_segment(std::string_view text) {
  std::string out;
  bool pending = false;
  for (char c : text) {
    if (is_alnum(c)) {
      if (pending && !out.empty()) out.push_back('_');
      pending = false;
      out.push_back(c >= 'a' && c <= 'z' ? char(c - 'a' + 'A') : c);
    } else {
      pending = true;
    }
  }
  return out;
}

std::string reference_alias(std::string_view id) {
  std::string alias = normalize_segment(id);
  if (alias.empty() || !(alias.front() >= 'A' && alias.front() <= 'Z')) {
    throw Error(ErrorKind::validation,
                fmt::format("requirement id '{}' does not normalize to a "
                            "constant name starting with a letter",
                            id));
  }
  return alias;
}

std::string normalize_name(std::string_view id, std::string_view title,
                           const NamingOptions& options, Diagnostics* diag) {
  const std::string id_part = reference_alias(id);
  const std::string title_part = normalize_segment(title);
  if (title_part.empty()) {
    if (!title.empty()) {
      warn(diag, fmt::format("{}: title '{}' has no letters or digits; using "
                             "the id-only constant name",
                             id, title));
    }
    return truncate_name(id_part, id_part.size(), options.max_length);
  }
  return truncate_name(id_part + "_" + title_part, id_part.size(),
                       options.max_length);
}

std::map<std::string, std::string> assign_constant_names(
    std::span<const Requirement> requirements, const NamingOptions& options,
    Diagnostics* diag) {
  NamingOptions unbounded = options;
  unbounded.max_length = std::string::npos - 1;

  std::map<std::string, std::string> full_owner;   // untruncated name -> id
  std::map<std::string, std::string> alias_owner;  // alias -> id
  std::map<std::string, const Requirement*> by_id;
  for (const auto& r : requirements) {
    if (!by_id.emplace(r.id, &r).second) {
      throw Error(ErrorKind::collision,
                  fmt::format("requirement id {} appears twice", r.id));
    }
  }

  for (const auto& [id, req] : by_id) {
    const std::string alias = reference_alias(id);
    if (auto [it, fresh] = alias_owner.emplace(alias, id); !fresh) {
      throw Error(ErrorKind::collision,
                  fmt::format("requirements {} and {} both normalize to {}",
                              it->second, id, alias));
    }
    const std::string full = normalize_name(id, req->title, unbounded);
    if (auto [it, fresh] = full_owner.emplace(full, id); !fresh) {
      throw Error(ErrorKind::collision,
                  fmt::format("requirements {} and {} both normalize to "
                              "constant name {}",
                              it->second, id, full));
    }
  }

  std::map<std::string, std::string> names;
  std::set<std::string> taken;
  for (const auto& [id, req] : by_id) {
    std::string name = normalize_name(id, req->title, options, diag);
    if (taken.contains(name)) {
      const std::string base = name;
      for (int n = 2;; ++n) {
        const std::string suffix = fmt::format("_{}", n);
        std::string stem = base;
        if (stem.size() + suffix.size() > options.max_length &&
            options.max_length > suffix.size()) {
          stem = strip_trailing_underscores(
              stem.substr(0, options.max_length - suffix.size()));
        }
        std::string candidate = stem + suffix;
        if (!taken.contains(candidate)) {
          name = std::move(candidate);
          break;
        }
      }
    }
    taken.insert(name);
    names.emplace(id, std::move(name));
  }
  // A reference must never resolve to two Traceables.
  for (const auto& [id, name] : names) {
    const auto it = alias_owner.find(name);
    if (it != alias_owner.end() && it->second != id) {
      throw Error(ErrorKind::collision,
                  fmt::format("constant name {} of {} equals the alias of {}",
                              name, id, it->second));
    }
  }
  return names;
}

}  // namespace reqtocode
