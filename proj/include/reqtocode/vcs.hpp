#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "reqtocode/error.hpp"
#include "reqtocode/source_tree.hpp"
#include "reqtocode/timestamp.hpp"

namespace reqtocode {

/// Names the uncommitted working tree instead of a commit.
inline constexpr std::string_view kWorktree = "WORKTREE";

struct RevisionRef {
  std::string name;
  std::string resolved_id;  // commit hash; HEAD's (or empty) for WORKTREE

  friend bool operator==(const RevisionRef&, const RevisionRef&) = default;
};

/// Read-only view of version-control history. The rest of the pipeline only
/// talks to this interface, so tests can substitute an in-memory history.
class Vcs {
 public:
  virtual ~Vcs() = default;

  /// Throws Error(revision) if `name` does not name a commit.
  virtual RevisionRef resolve(std::string_view name) const = 0;
  virtual SourceTree read_tree(const RevisionRef& rev,
                               Diagnostics* diag = nullptr) const = 0;
  /// Most recent commit at or before `rev` touching `path`. Throws
  /// Error(path) if the path does not exist at `rev`.
  virtual Timestamp last_commit_time(const RevisionRef& rev,
                                     std::string_view path) const = 0;
  /// Local branches sorted by name.
  virtual std::vector<RevisionRef> list_branches() const = 0;
};

enum class CommitClock { committer, author };

/// Drives the `git` executable; no libgit dependency.
class GitRepository final : public Vcs {
 public:
  /// Throws Error(repository) when `dir` is not inside a git work tree.
  static GitRepository open(const std::filesystem::path& dir,
                            CommitClock clock = CommitClock::committer);

  const std::filesystem::path& toplevel() const { return toplevel_; }

  RevisionRef resolve(std::string_view name) const override;
  SourceTree read_tree(const RevisionRef& rev,
                       Diagnostics* diag = nullptr) const override;
  Timestamp last_commit_time(const RevisionRef& rev,
                             std::string_view path) const override;
  std::vector<RevisionRef> list_branches() const override;

  /// Short name of the checked-out branch; empty when HEAD is detached.
  std::string current_branch() const;

 private:
  GitRepository(std::filesystem::path toplevel, CommitClock clock)
      : toplevel_(std::move(toplevel)), clock_(clock) {}

  std::string git(const std::vector<std::string>& args,
                  std::string_view input = {}) const;
  std::string head_or_empty() const;

  std::filesystem::path toplevel_;
  CommitClock clock_;
};

}  // namespace reqtocode
