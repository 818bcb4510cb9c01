#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reqtocode/lifecycle.hpp"
#include "reqtocode/naming.hpp"
#include "reqtocode/requirements.hpp"
#include "reqtocode/scanner.hpp"
#include "reqtocode/vcs.hpp"

namespace reqtocode {

inline constexpr std::string_view kConfigFileName = "reqtocode.ini";

/// Everything a pipeline run needs, read from one INI file at the
/// repository root. Relative paths are relative to `repo_root`.
struct ToolConfig {
  std::filesystem::path repo_root;

  // Exactly one of these is set.
  std::optional<std::string> source_files;  // directory of requirement files
  std::optional<std::string> source_alm;    // mock-ALM URL or payload path
  FormatConfig format;

  std::vector<PartitionRule> partition_rules;
  LifecycleConfig lifecycle;

  std::string profile_id = "pseudo";
  std::string artifact_root = "traceables";  // '/'-separated, relative
  std::optional<std::string> profiles_dir;
  NamingOptions naming;

  ScanConfig scan;

  std::optional<std::string> baseline;
  std::chrono::seconds drift_tolerance{0};
  CommitClock commit_clock = CommitClock::committer;

  std::filesystem::path artifact_dir() const { return repo_root / artifact_root; }
};

/// Throws Error(config) naming the section and key at fault.
ToolConfig parse_tool_config(std::string_view ini_text,
                             const std::filesystem::path& repo_root);

/// Reads `path`; the repository root is the file's directory.
ToolConfig load_tool_config(const std::filesystem::path& path);

bool is_identifier(std::string_view text);

}  // namespace reqtocode
