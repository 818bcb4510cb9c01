#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reqtocode/process.hpp"
#include "reqtocode/vcs.hpp"

namespace rtc_test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// A scratch git repository with pinned identities and commit dates, so
/// that hashes and commit times are reproducible.
class GitFixture {
 public:
  GitFixture();

  const std::filesystem::path& root() const { return dir_.path(); }

  void write(const std::string& rel, const std::string& content) const;
  std::string read(const std::string& rel) const;
  /// Removes a file or a whole directory.
  void remove(const std::string& rel) const;
  bool exists(const std::string& rel) const;

  /// `git add -A` and commit with both dates set to `iso_date`; returns
  /// the commit hash.
  std::string commit(const std::string& message, const std::string& iso_date) const;
  void checkout(const std::string& branch, bool create = false) const;
  /// Throws std::runtime_error when git fails.
  std::string git(std::vector<std::string> args) const;

  /// Runs the CLI in-process against this repository's configuration.
  CliResult cli(std::vector<std::string> args) const;

 private:
  TempDir dir_;
};

/// Front-matter requirement file.
std::string requirement_file(const std::string& id, const std::string& title,
                             const std::string& status,
                             const std::string& last_modified,
                             const std::string& category = "SWR",
                             const std::optional<std::string>& scope = std::nullopt);

/// Writes `requirements/<id>.md`.
void put_requirement(const GitFixture& repo, const std::string& id,
                     const std::string& title, const std::string& status,
                     const std::string& last_modified,
                     const std::optional<std::string>& scope = std::nullopt);

/// Count of lines in `text` starting with `prefix`.
int count_lines_starting(const std::string& text, const std::string& prefix);

/// In-memory history for pipeline tests that do not need git.
class FakeVcs final : public reqtocode::Vcs {
 public:
  void add_revision(const std::string& name, reqtocode::SourceTree tree);
  void set_commit_time(const std::string& rev, const std::string& path,
                       reqtocode::Timestamp t);

  reqtocode::RevisionRef resolve(std::string_view name) const override;
  reqtocode::SourceTree read_tree(const reqtocode::RevisionRef& rev,
                                  reqtocode::Diagnostics* diag) const override;
  reqtocode::Timestamp last_commit_time(const reqtocode::RevisionRef& rev,
                                        std::string_view path) const override;
  std::vector<reqtocode::RevisionRef> list_branches() const override;

  mutable int commit_time_lookups = 0;

 private:
  std::map<std::string, reqtocode::SourceTree> trees_;
  std::map<std::pair<std::string, std::string>, reqtocode::Timestamp> times_;
};

reqtocode::Timestamp ts(const std::string& rfc3339);

}  // namespace rtc_test
