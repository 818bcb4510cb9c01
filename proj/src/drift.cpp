#include "reqtocode/drift.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <set>

namespace reqtocode {

std::string_view to_string(DriftDirection direction) noexcept {
  return direction == DriftDirection::requirement_newer ? "RequirementNewer"
                                                        : "CodeNewer";
}

std::optional<DriftDirection> classify_drift(Timestamp requirement_time,
                                             Timestamp code_time,
                                             std::chrono::seconds tolerance) {
  if (requirement_time > code_time + tolerance) {
    return DriftDirection::requirement_newer;
  }
  if (code_time > requirement_time + tolerance) {
    return DriftDirection::code_newer;
  }
  return std::nullopt;
}

std::vector<DriftFinding> detect_drift(std::span<const Traceable> traceables,
                                       const ResolutionResult& resolution,
                                       const RevisionRef& revision,
                                       const Vcs& vcs,
                                       std::chrono::seconds tolerance,
                                       Diagnostics* diag) {
  std::map<std::string, std::set<std::string>> files_by_id;
  for (const auto& r : resolution.resolved) {
    files_by_id[r.traceable.requirement_id].insert(r.reference.file);
  }

  // Failed lookups are cached as nullopt so each file warns once.
  std::map<std::string, std::optional<Timestamp>> commit_time_cache;
  std::vector<DriftFinding> findings;
  std::set<std::string> done;
  for (const auto& t : traceables) {
    if (!done.insert(t.requirement_id).second) continue;
    const auto files = files_by_id.find(t.requirement_id);
    if (files == files_by_id.end()) continue;

    const auto modified = t.metadata_value("last_modified");
    const auto req_time = modified ? parse_timestamp(*modified) : std::nullopt;
    if (!req_time) {
      warn(diag, fmt::format("{}: no last_modified metadata; drift not checked",
                             t.requirement_id));
      continue;
    }

    std::optional<Timestamp> code_time;
    std::vector<std::string> evidence;
    for (const auto& file : files->second) {
      auto cached = commit_time_cache.find(file);
      if (cached == commit_time_cache.end()) {
        std::optional<Timestamp> when;
        try {
          when = vcs.last_commit_time(revision, file);
        } catch (const Error& e) {
          warn(diag, fmt::format("{}; ignored for drift", e.what()));
        }
        cached = commit_time_cache.emplace(file, when).first;
      }
      if (!cached->second) continue;
      evidence.push_back(file);
      if (!code_time || *cached->second > *code_time) code_time = cached->second;
    }
    if (!code_time) continue;

    if (const auto dir = classify_drift(*req_time, *code_time, tolerance)) {
      findings.push_back({t.requirement_id, *dir, *req_time, *code_time,
                          std::move(evidence)});
    }
  }
  std::sort(findings.begin(), findings.end(),
            [](const DriftFinding& a, const DriftFinding& b) {
              return a.requirement_id < b.requirement_id;
            });
  return findings;
}

}  // namespace reqtocode
