#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reqtocode/error.hpp"
#include "reqtocode/timestamp.hpp"

namespace reqtocode {

/// One requirement as read from the authoritative source.
struct Requirement {
  std::string id;
  std::string title;  // trimmed, internal whitespace collapsed
  std::string status;
  Timestamp last_modified{};
  std::string category;
  std::optional<std::string> scope;

  // Keys the loader did not recognise, in file order. Kept, never used.
  std::vector<std::pair<std::string, std::string>> extra;
  // Where the requirement was defined ("path:line" or a JSON path); used in
  // diagnostics only and excluded from comparisons.
  std::string origin;

  friend bool operator==(const Requirement& a, const Requirement& b) {
    return a.id == b.id && a.title == b.title && a.status == b.status &&
           a.last_modified == b.last_modified && a.category == b.category &&
           a.scope == b.scope;
  }
};

struct SourceSnapshot {
  std::vector<Requirement> requirements;  // sorted by id, ids unique
  Timestamp taken_at{};
  std::string source_id;
};

struct FormatConfig {
  std::vector<std::string> status_vocabulary{"Draft", "Approved", "Deprecated",
                                             "Removed"};
  std::vector<std::string> extensions{".md"};
};

/// Parses one front-matter requirement file. `file_name` only feeds
/// diagnostics. Throws Error(parse) naming file and line.
Requirement parse_requirement_file(std::string_view content,
                                   std::string_view file_name);

/// Reads every requirement file below `root` (recursively).
SourceSnapshot load_from_files(const std::filesystem::path& root,
                               const FormatConfig& format = {},
                               Diagnostics* diag = nullptr);

/// Decodes a mock-ALM JSON payload. Throws Error(schema) with a field path
/// on shape mismatches and Error(validation) on content problems.
SourceSnapshot parse_alm_payload(std::string_view json, std::string source_id,
                                 const FormatConfig& format = {},
                                 Diagnostics* diag = nullptr);

/// `endpoint` is either an http:// URL (fetched with GET) or a local path.
SourceSnapshot load_from_mock_alm(std::string_view endpoint,
                                  const std::optional<std::string>& auth_token,
                                  const FormatConfig& format = {},
                                  Diagnostics* diag = nullptr);

/// Canonical, deterministic text form of the requirement list. Excludes
/// taken_at so that reloading unchanged input yields identical bytes.
std::string serialize_snapshot(const SourceSnapshot& snapshot);

/// SHA-256 over serialize_snapshot; stamped into generated headers.
std::string snapshot_hash(const SourceSnapshot& snapshot);

std::string collapse_whitespace(std::string_view text);

// ---------------------------------------------------------------------------
// Partitioning into RequirementSets

/// A requirement falls under the rule when its category matches
/// `category_pattern` and the snapshot's source id matches `source_pattern`.
struct PartitionRule {
  std::string set_name;
  std::string category_pattern = "*";
  std::string source_pattern = "**";  // any source, including URLs
};

struct RequirementPartition {
  std::string set_name;
  std::vector<Requirement> requirements;  // sorted by id
};

/// Each requirement must map to exactly one set name. Throws
/// Error(unpartitioned) or Error(ambiguous_partition) listing the ids.
std::vector<RequirementPartition> partition(
    std::span<const Requirement> requirements, std::string_view source_id,
    std::span<const PartitionRule> rules);

std::vector<RequirementPartition> partition(
    const SourceSnapshot& snapshot, std::span<const PartitionRule> rules);

}  // namespace reqtocode
