#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "reqtocode/config.hpp"

namespace reqtocode {

/// Process exit statuses. A run never mixes them.
enum ExitStatus : int {
  kExitClean = 0,
  kExitFinding = 1,    // traceability finding under the active strictness
  kExitOperational = 2 // anything that prevented the check from running
};

struct VerifyOptions {
  std::string revision{kWorktree};
  bool deny_deprecated = false;
};

struct ReportOptions {
  std::string revision{kWorktree};
  std::optional<std::string> baseline;
  std::string format = "table";
  std::optional<std::string> set_filter;
  bool drift = true;
  bool all_scopes = false;
  std::optional<double> min_coverage;  // percent of rows with impl refs
  std::optional<std::string> output;   // file instead of stdout
  std::optional<std::string> post;     // http:// URL receiving the json form
};

struct DriftOptions {
  std::string revision{kWorktree};
  bool strict = false;
  std::optional<std::chrono::seconds> tolerance;  // overrides the config
};

/// Each command reports errors of type Error by letting them propagate;
/// run_cli maps them to kExitOperational.
int cmd_sync(const ToolConfig& config, std::ostream& out, std::ostream& err);
int cmd_verify(const ToolConfig& config, const VerifyOptions& options,
               std::ostream& out, std::ostream& err);
int cmd_report(const ToolConfig& config, const ReportOptions& options,
               std::ostream& out, std::ostream& err);
int cmd_drift(const ToolConfig& config, const DriftOptions& options,
              std::ostream& out, std::ostream& err);

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

inline constexpr const char* kTokenEnvVar = "REQTOCODE_ALM_TOKEN";

}  // namespace reqtocode
