#pragma once

#include <chrono>
#include <span>
#include <string>
#include <vector>

#include "reqtocode/codegen.hpp"
#include "reqtocode/scanner.hpp"
#include "reqtocode/vcs.hpp"

namespace reqtocode {

enum class DriftDirection { requirement_newer, code_newer };

std::string_view to_string(DriftDirection direction) noexcept;

struct DriftFinding {
  std::string requirement_id;
  DriftDirection direction = DriftDirection::requirement_newer;
  Timestamp requirement_time{};
  Timestamp code_time{};
  std::vector<std::string> evidence_files;  // sorted, never empty

  friend bool operator==(const DriftFinding&, const DriftFinding&) = default;
};

/// Pure direction rule: RequirementNewer when the requirement is later than
/// the code by more than `tolerance`, CodeNewer for the converse, else none.
std::optional<DriftDirection> classify_drift(Timestamp requirement_time,
                                             Timestamp code_time,
                                             std::chrono::seconds tolerance);

/// Compares each referenced requirement's last_modified with the newest
/// commit touching any file that references it. Unreferenced Traceables
/// produce nothing. Findings sorted by requirement id.
std::vector<DriftFinding> detect_drift(std::span<const Traceable> traceables,
                                       const ResolutionResult& resolution,
                                       const RevisionRef& revision,
                                       const Vcs& vcs,
                                       std::chrono::seconds tolerance,
                                       Diagnostics* diag = nullptr);

}  // namespace reqtocode
