#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reqtocode/codegen.hpp"
#include "reqtocode/drift.hpp"
#include "reqtocode/scanner.hpp"
#include "reqtocode/vcs.hpp"

namespace reqtocode {

struct CoverageRow {
  std::string constant_name;
  std::string requirement_id;
  std::string traceable;  // id alias, as shown in tables
  int impl_count = 0;
  int test_count = 0;
  LifecycleState state = LifecycleState::active;

  friend bool operator==(const CoverageRow&, const CoverageRow&) = default;
};

struct LifecycleDistribution {
  int active = 0;
  int deprecated = 0;
  int deprecated_impl_refs = 0;  // implementation references to Deprecated

  friend bool operator==(const LifecycleDistribution&,
                         const LifecycleDistribution&) = default;
};

struct CoverageReport {
  std::vector<CoverageRow> rows;  // sorted by requirement_id
  LifecycleDistribution lifecycle_distribution;
  RevisionRef revision;
  std::optional<std::string> set_filter;
};

struct DeltaReport {
  std::vector<CoverageRow> rows;  // counts are deltas; all-zero rows omitted
  RevisionRef branch;
  RevisionRef baseline;
  std::optional<std::string> set_filter;
};

/// Which scoped Traceables a report shows. A Traceable without a scope tag
/// is always in view; a scoped one is in view when its scope equals
/// `context`, or when it has at least one reference at this revision.
/// Disengaged: every Traceable is in view.
using ScopeContext = std::optional<std::string>;

/// One row per in-view Traceable (zero-count rows included).
CoverageReport compute_coverage(std::span<const Traceable> traceables,
                                const ResolutionResult& resolution,
                                const RevisionRef& revision,
                                const std::optional<std::string>& set_filter,
                                const ScopeContext& scope_context = std::nullopt);

/// A branch reference counts when its (file, constant_name, kind) triple is
/// absent from the baseline index.
DeltaReport compute_delta(const ReferenceIndex& branch_index,
                          const ReferenceIndex& baseline_index,
                          std::span<const Traceable> traceables,
                          const RevisionRef& branch,
                          const RevisionRef& baseline,
                          const std::optional<std::string>& set_filter =
                              std::nullopt);

enum class ReportFormat { table, json };

/// Throws Error(usage) for anything but "table" or "json".
ReportFormat parse_report_format(std::string_view text);

/// Drift is rendered as its own section when `drift` is engaged.
std::string render(const CoverageReport& report, ReportFormat format,
                   const std::optional<std::vector<DriftFinding>>& drift =
                       std::nullopt);
std::string render(const DeltaReport& report, ReportFormat format,
                   const std::optional<std::vector<DriftFinding>>& drift =
                       std::nullopt);

/// Share of rows with at least one implementation reference, in percent
/// (100 for an empty report).
double implementation_coverage_percent(const CoverageReport& report);

}  // namespace reqtocode
