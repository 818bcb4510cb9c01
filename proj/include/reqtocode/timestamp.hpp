#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace reqtocode {

/// UTC instant with second precision.
using Timestamp = std::chrono::sys_seconds;

/// Accepts RFC 3339 date-times (`2026-02-18T14:32:00Z`, offsets such as
/// `+01:00`, optional fractional seconds which are truncated).
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Always renders in the canonical `YYYY-MM-DDTHH:MM:SSZ` form.
std::string format_timestamp(Timestamp t);

Timestamp now_utc();

}  // namespace reqtocode
