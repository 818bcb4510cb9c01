#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "reqtocode/error.hpp"
#include "reqtocode/requirements.hpp"

namespace reqtocode {

struct NamingOptions {
  std::size_t max_length = 80;
};

/// Uppercases ASCII letters and collapses every run of other characters
/// into a single underscore; leading and trailing underscores are dropped.
std::string normalize_segment(std::string_view text);

/// The id-only constant name (`SWR-101` -> `SWR_101`). Code may reference a
/// Traceable through this alias as well as through its full constant name.
/// Throws Error(validation) when the id does not start with a letter.
std::string reference_alias(std::string_view id);

/// `<ID>_<TITLE>` in constant-name form, cut back to `max_length` at a word
/// boundary when possible. A title without any alphanumerics yields the
/// id-only name (with a warning).
std::string normalize_name(std::string_view id, std::string_view title,
                           const NamingOptions& options = {},
                           Diagnostics* diag = nullptr);

/// Constant names for a group of requirements, keyed by requirement id.
/// Names that only clash because of truncation get `_2`, `_3`, ... in id
/// order; full names or aliases that clash outright throw Error(collision).
std::map<std::string, std::string> assign_constant_names(
    std::span<const Requirement> requirements,
    const NamingOptions& options = {}, Diagnostics* diag = nullptr);

}  // namespace reqtocode
