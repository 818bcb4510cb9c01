#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace reqtocode {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

using EnvOverrides = std::vector<std::pair<std::string, std::string>>;

/// Runs argv[0] (looked up on PATH) without a shell, feeding `input` on
/// stdin and capturing both output streams. Throws Error(io) when the
/// process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& cwd,
                          std::string_view input = {},
                          const EnvOverrides& env = {});

}  // namespace reqtocode
