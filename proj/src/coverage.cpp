#include "reqtocode/coverage.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <map>
#include <json.hpp>
#include <set>
#include <tuple>

namespace reqtocode {

namespace {

using nlohmann::json;

bool in_set(const Traceable& t, const std::optional<std::string>& filter) {
  return !filter || t.set_name == *filter;
}

// Live Traceables passing the set filter, one per requirement id.
std::map<std::string, const Traceable*> live_by_id(
    std::span<const Traceable> traceables,
    const std::optional<std::string>& set_filter) {
  std::map<std::string, const Traceable*> out;
  for (const auto& t : traceables) {
    if (t.state.state == LifecycleState::removed) continue;
    if (!in_set(t, set_filter)) continue;
    out.emplace(t.requirement_id, &t);
  }
  return out;
}

CoverageRow empty_row(const Traceable& t) {
  CoverageRow row;
  row.constant_name = t.constant_name;
  row.requirement_id = t.requirement_id;
  row.traceable = t.alias();
  row.state = t.state.state;
  return row;
}

void count(CoverageRow& row, ReferenceKind kind) {
  (kind == ReferenceKind::implementation ? row.impl_count : row.test_count)++;
}

std::string_view status_label(LifecycleState s) { return to_string(s); }

json revision_json(const RevisionRef& r) {
  return json{{"name", r.name}, {"id", r.resolved_id}};
}

json rows_json(const std::vector<CoverageRow>& rows, bool delta) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back(json{{"traceable", r.traceable},
                       {"constant_name", r.constant_name},
                       {"requirement_id", r.requirement_id},
                       {"implementation_references", r.impl_count},
                       {"test_references", r.test_count},
                       {"status", status_label(r.state)},
                       {"delta", delta}});
  }
  return out;
}

json drift_json(const std::optional<std::vector<DriftFinding>>& drift) {
  if (!drift) return nullptr;
  json out = json::array();
  for (const auto& f : *drift) {
    out.push_back(json{{"requirement_id", f.requirement_id},
                       {"direction", to_string(f.direction)},
                       {"requirement_time", format_timestamp(f.requirement_time)},
                       {"code_time", format_timestamp(f.code_time)},
                       {"evidence_files", f.evidence_files}});
  }
  return out;
}

json optional_string(const std::optional<std::string>& s) {
  return s ? json(*s) : json(nullptr);
}

std::string render_table(const std::vector<CoverageRow>& rows, bool delta) {
  const std::string suffix = delta ? " (delta)" : "";
  std::vector<std::array<std::string, 4>> cells;
  cells.push_back({"Traceable", "Implementation References" + suffix,
                   "Test References" + suffix, "Status"});
  for (const auto& r : rows) {
    cells.push_back({r.traceable, std::to_string(r.impl_count),
                     std::to_string(r.test_count),
                     std::string(status_label(r.state))});
  }
  std::array<std::size_t, 4> width{};
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < 4; ++i) {
      width[i] = std::max(width[i], line[i].size());
    }
  }

  std::string out;
  auto emit = [&](const std::array<std::string, 4>& line) {
    std::string text;
    for (std::size_t i = 0; i < 4; ++i) {
      if (i > 0) text += " | ";
      text += fmt::format("{:<{}}", line[i], width[i]);
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out += text;
    out += '\n';
  };
  emit(cells.front());
  std::string rule;
  for (std::size_t i = 0; i < 4; ++i) {
    if (i > 0) rule += "-|-";
    rule += std::string(width[i], '-');
  }
  out += rule + '\n';
  for (std::size_t i = 1; i < cells.size(); ++i) emit(cells[i]);
  return out;
}

std::string render_drift_section(
    const std::optional<std::vector<DriftFinding>>& drift) {
  if (!drift) return {};
  std::string out = "\nDrift\n";
  if (drift->empty()) return out + "  none\n";
  for (const auto& f : *drift) {
    std::string files;
    for (const auto& file : f.evidence_files) {
      if (!files.empty()) files += ',';
      files += file;
    }
    out += fmt::format("  {} {} requirement={} code={} files={}\n",
                       f.requirement_id, to_string(f.direction),
                       format_timestamp(f.requirement_time),
                       format_timestamp(f.code_time), files);
  }
  return out;
}

std::string describe(const RevisionRef& r) {
  if (r.resolved_id.empty() || r.resolved_id == r.name) return r.name;
  return fmt::format("{} ({})", r.name, r.resolved_id.substr(0, 12));
}

}  // namespace

CoverageReport compute_coverage(std::span<const Traceable> traceables,
                                const ResolutionResult& resolution,
                                const RevisionRef& revision,
                                const std::optional<std::string>& set_filter,
                                const ScopeContext& scope_context) {
  const auto live = live_by_id(traceables, set_filter);
  std::map<std::string, CoverageRow> rows;
  for (const auto& [id, t] : live) rows.emplace(id, empty_row(*t));
  for (const auto& r : resolution.resolved) {
    const auto it = rows.find(r.traceable.requirement_id);
    if (it != rows.end()) count(it->second, r.reference.kind);
  }

  CoverageReport report;
  report.revision = revision;
  report.set_filter = set_filter;
  for (auto& [id, row] : rows) {
    if (scope_context) {
      const auto scope = live.at(id)->metadata_value("scope");
      const bool referenced = row.impl_count + row.test_count > 0;
      if (scope && *scope != *scope_context && !referenced) continue;
    }
    auto& dist = report.lifecycle_distribution;
    if (row.state == LifecycleState::deprecated) {
      ++dist.deprecated;
      dist.deprecated_impl_refs += row.impl_count;
    } else {
      ++dist.active;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

DeltaReport compute_delta(const ReferenceIndex& branch_index,
                          const ReferenceIndex& baseline_index,
                          std::span<const Traceable> traceables,
                          const RevisionRef& branch,
                          const RevisionRef& baseline,
                          const std::optional<std::string>& set_filter) {
  using Key = std::tuple<std::string, std::string, ReferenceKind>;
  std::set<Key> known;
  for (const auto& r : baseline_index.references) {
    known.emplace(r.file, r.constant_name, r.kind);
  }
  ReferenceIndex fresh;
  for (const auto& r : branch_index.references) {
    if (!known.contains(Key{r.file, r.constant_name, r.kind})) {
      fresh.references.push_back(r);
    }
  }

  const auto live = live_by_id(traceables, set_filter);
  std::map<std::string, CoverageRow> rows;
  for (const auto& r : resolve(fresh, traceables).resolved) {
    const auto it = live.find(r.traceable.requirement_id);
    if (it == live.end()) continue;
    auto row = rows.try_emplace(it->first, empty_row(*it->second)).first;
    count(row->second, r.reference.kind);
  }

  DeltaReport report;
  report.branch = branch;
  report.baseline = baseline;
  report.set_filter = set_filter;
  for (auto& [id, row] : rows) report.rows.push_back(std::move(row));
  return report;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "table") return ReportFormat::table;
  if (text == "json") return ReportFormat::json;
  throw Error(ErrorKind::usage,
              fmt::format("unknown report format '{}' (expected table or json)",
                          text));
}

std::string render(const CoverageReport& report, ReportFormat format,
                   const std::optional<std::vector<DriftFinding>>& drift) {
  if (format == ReportFormat::json) {
    const auto& d = report.lifecycle_distribution;
    json doc{{"kind", "coverage"},
             {"schema_version", 1},
             {"revision", revision_json(report.revision)},
             {"baseline", nullptr},
             {"set_filter", optional_string(report.set_filter)},
             {"rows", rows_json(report.rows, false)},
             {"lifecycle_distribution",
              {{"active", d.active},
               {"deprecated", d.deprecated},
               {"deprecated_implementation_references",
                d.deprecated_impl_refs}}},
             {"drift", drift_json(drift)}};
    return doc.dump(2) + '\n';
  }

  std::string out = fmt::format("Coverage at {}", describe(report.revision));
  if (report.set_filter) out += fmt::format(", set {}", *report.set_filter);
  out += "\n\n" + render_table(report.rows, false);
  const auto& d = report.lifecycle_distribution;
  out += fmt::format(
      "\nLifecycle: {} Active, {} Deprecated ({} implementation references "
      "to Deprecated)\n",
      d.active, d.deprecated, d.deprecated_impl_refs);
  out += fmt::format("Implementation coverage: {:.1f}%\n",
                     implementation_coverage_percent(report));
  out += render_drift_section(drift);
  return out;
}

std::string render(const DeltaReport& report, ReportFormat format,
                   const std::optional<std::vector<DriftFinding>>& drift) {
  if (format == ReportFormat::json) {
    json doc{{"kind", "delta"},
             {"schema_version", 1},
             {"revision", revision_json(report.branch)},
             {"baseline", revision_json(report.baseline)},
             {"set_filter", optional_string(report.set_filter)},
             {"rows", rows_json(report.rows, true)},
             {"lifecycle_distribution", nullptr},
             {"drift", drift_json(drift)}};
    return doc.dump(2) + '\n';
  }

  std::string out = fmt::format("Delta of {} against {}",
                                describe(report.branch),
                                describe(report.baseline));
  if (report.set_filter) out += fmt::format(", set {}", *report.set_filter);
  out += "\n\n" + render_table(report.rows, true);
  out += render_drift_section(drift);
  return out;
}

double implementation_coverage_percent(const CoverageReport& report) {
  if (report.rows.empty()) return 100.0;
  const auto covered = std::count_if(
      report.rows.begin(), report.rows.end(),
      [](const CoverageRow& r) { return r.impl_count > 0; });
  return 100.0 * static_cast<double>(covered) /
         static_cast<double>(report.rows.size());
}

}  // namespace reqtocode
