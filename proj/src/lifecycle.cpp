#include "reqtocode/lifecycle.hpp"

#include <fmt/format.h>

#include <stdexcept>

#include "reqtocode/error.hpp"

namespace reqtocode {
namespace {

TraceableState removed() { return {LifecycleState::removed, {}, {}}; }

TraceableState deprecated(Timestamp since, int remaining) {
  return {LifecycleState::deprecated, since, remaining};
}

}  // namespace

std::string_view to_string(LifecycleState state) noexcept {
  switch (state) {
    case LifecycleState::active: return "Active";
    case LifecycleState::deprecated: return "Deprecated";
    case LifecycleState::removed: return "Removed";
  }
  return "?";
}

std::optional<LifecycleState> parse_lifecycle_state(std::string_view text) {
  if (text == "Active") return LifecycleState::active;
  if (text == "Deprecated") return LifecycleState::deprecated;
  if (text == "Removed") return LifecycleState::removed;
  return std::nullopt;
}

std::string_view to_string(Intent intent) noexcept {
  switch (intent) {
    case Intent::active: return "active";
    case Intent::deprecated: return "deprecated";
    case Intent::removed: return "removed";
  }
  return "?";
}

std::optional<Intent> parse_intent(std::string_view text) {
  if (text == "active") return Intent::active;
  if (text == "deprecated") return Intent::deprecated;
  if (text == "removed") return Intent::removed;
  return std::nullopt;
}

void LifecycleConfig::validate(std::span<const std::string> vocabulary) const {
  if (grace_cycles < 0) {
    throw Error(ErrorKind::config, "grace_cycles must be non-negative");
  }
  for (const auto& token : vocabulary) {
    if (!status_map.contains(token)) {
      throw Error(ErrorKind::config,
                  fmt::format("status '{}' has no lifecycle mapping", token));
    }
  }
}

TraceableState derive_state(std::string_view source_status,
                            const std::optional<TraceableState>& previous,
                            const LifecycleConfig& config,
                            Timestamp observed_at) {
  const auto it = config.status_map.find(source_status);
  if (it == config.status_map.end()) {
    throw Error(ErrorKind::config,
                fmt::format("status '{}' has no lifecycle mapping",
                            source_status));
  }
  const Intent intent = it->second;

  if (previous && previous->state == LifecycleState::removed) {
    if (intent == Intent::removed) return removed();
    throw Error(ErrorKind::resurrection,
                fmt::format("requirement reappeared with status '{}' after its "
                            "Traceable was removed; a re-created requirement "
                            "needs a new id",
                            source_status));
  }

  if (!config.lifecycle_info_available) {
    return intent == Intent::active ? TraceableState{} : removed();
  }

  switch (intent) {
    case Intent::active:
      return TraceableState{};
    case Intent::removed:
      return removed();
    case Intent::deprecated:
      break;
  }

  if (previous && previous->state == LifecycleState::deprecated) {
    const int remaining =
        previous->grace_remaining.value_or(config.grace_cycles) - 1;
    if (remaining <= 0) return removed();
    return deprecated(previous->deprecated_since.value_or(observed_at),
                      remaining);
  }
  if (config.grace_cycles == 0) return removed();
  return deprecated(observed_at, config.grace_cycles);
}

TraceableState absent_requirement_state(
    const std::optional<TraceableState>& previous,
    const LifecycleConfig& config, Timestamp observed_at) {
  if (!previous) {
    throw std::invalid_argument(
        "absent_requirement_state needs the previous state of a known id");
  }
  if (previous->state == LifecycleState::removed ||
      !config.lifecycle_info_available) {
    return removed();
  }
  if (previous->state == LifecycleState::deprecated) {
    const int remaining = previous->grace_remaining.value_or(0);
    if (remaining <= 0) return removed();
    return deprecated(previous->deprecated_since.value_or(observed_at),
                      remaining - 1);
  }
  if (config.grace_cycles == 0) return removed();
  return deprecated(observed_at, config.grace_cycles);
}

}  // namespace reqtocode
