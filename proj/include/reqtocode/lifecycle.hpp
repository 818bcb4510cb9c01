#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "reqtocode/timestamp.hpp"

namespace reqtocode {

enum class LifecycleState { active, deprecated, removed };

/// What the source status token asks for, before grace periods apply.
enum class Intent { active, deprecated, removed };

std::string_view to_string(LifecycleState state) noexcept;
std::optional<LifecycleState> parse_lifecycle_state(std::string_view text);
std::string_view to_string(Intent intent) noexcept;
std::optional<Intent> parse_intent(std::string_view text);

struct TraceableState {
  LifecycleState state = LifecycleState::active;
  // Present iff state == deprecated.
  std::optional<Timestamp> deprecated_since;
  // Sync cycles left before removal; present iff state == deprecated.
  std::optional<int> grace_remaining;

  friend bool operator==(const TraceableState&, const TraceableState&) = default;
};

struct LifecycleConfig {
  int grace_cycles = 2;
  // When false the source exposes no lifecycle transitions and any
  // non-active status (or disappearance) removes the Traceable at once.
  bool lifecycle_info_available = true;
  std::map<std::string, Intent, std::less<>> status_map{
      {"Draft", Intent::active},
      {"Approved", Intent::active},
      {"Deprecated", Intent::deprecated},
      {"Removed", Intent::removed},
  };

  /// Throws Error(config) unless status_map covers every vocabulary token
  /// and grace_cycles is non-negative.
  void validate(std::span<const std::string> vocabulary) const;
};

/// Advances one sync cycle for a requirement present in the source.
///
/// A deprecated intent enters Deprecated with `grace_cycles` remaining (or is
/// removed outright when the grace is zero); each further deprecated cycle
/// decrements the counter and the Traceable is removed when it reaches zero,
/// so a continuously deprecated requirement is removed at cycle g+1.
/// Deprecated -> Active (re-approval) is allowed; anything out of Removed
/// other than a removed intent throws Error(resurrection). An unknown status
/// throws Error(config). `observed_at` stamps deprecated_since on entry.
TraceableState derive_state(std::string_view source_status,
                            const std::optional<TraceableState>& previous,
                            const LifecycleConfig& config,
                            Timestamp observed_at);

/// Advances one sync cycle for a requirement that vanished from the source.
/// Absence counts as deprecation; the counter runs down to zero and removal
/// happens on the cycle after it hit zero. `previous` must be engaged.
TraceableState absent_requirement_state(
    const std::optional<TraceableState>& previous,
    const LifecycleConfig& config, Timestamp observed_at);

}  // namespace reqtocode
