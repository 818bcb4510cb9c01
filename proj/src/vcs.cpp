#include "reqtocode/vcs.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "reqtocode/process.hpp"

namespace reqtocode {
namespace {

const EnvOverrides kGitEnv{{"LC_ALL", "C"}, {"GIT_TERMINAL_PROMPT", "0"}};

std::string trim_newline(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto end = s.find(sep, pos);
    if (end == std::string_view::npos) end = s.size();
    out.push_back(s.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

}  // namespace

GitRepository GitRepository::open(const std::filesystem::path& dir,
                                  CommitClock clock) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorKind::repository, "not a directory: " + dir.string());
  }
  ProcessResult r;
  try {
    r = run_process({"git", "rev-parse", "--show-toplevel"}, dir, {}, kGitEnv);
  } catch (const Error& e) {
    throw Error(ErrorKind::repository, e.what());
  }
  if (r.exit_code != 0) {
    throw Error(ErrorKind::repository,
                fmt::format("{} is not inside a git working tree", dir.string()));
  }
  return GitRepository(std::filesystem::path(trim_newline(r.out)), clock);
}

std::string GitRepository::git(const std::vector<std::string>& args,
                               std::string_view input) const {
  std::vector<std::string> argv{"git", "--literal-pathspecs"};
  argv.insert(argv.end(), args.begin(), args.end());
  const ProcessResult r = run_process(argv, toplevel_, input, kGitEnv);
  if (r.exit_code != 0) {
    throw Error(ErrorKind::repository,
                fmt::format("git {} failed: {}", args.empty() ? "" : args[0],
                            trim_newline(r.err)));
  }
  return r.out;
}

std::string GitRepository::head_or_empty() const {
  const ProcessResult r = run_process(
      {"git", "rev-parse", "--verify", "--quiet", "HEAD^{commit}"}, toplevel_,
      {}, kGitEnv);
  return r.exit_code == 0 ? trim_newline(r.out) : std::string{};
}

std::string GitRepository::current_branch() const {
  const ProcessResult r = run_process(
      {"git", "symbolic-ref", "--quiet", "--short", "HEAD"}, toplevel_, {},
      kGitEnv);
  return r.exit_code == 0 ? trim_newline(r.out) : std::string{};
}

RevisionRef GitRepository::resolve(std::string_view name) const {
  if (name == kWorktree) return {std::string(kWorktree), head_or_empty()};
  if (name.empty() || name.front() == '-') {
    throw Error(ErrorKind::revision, fmt::format("invalid revision '{}'", name));
  }
  const ProcessResult r = run_process(
      {"git", "rev-parse", "--verify", "--quiet",
       std::string(name) + "^{commit}"},
      toplevel_, {}, kGitEnv);
  if (r.exit_code != 0) {
    throw Error(ErrorKind::revision,
                fmt::format("revision '{}' does not resolve to a commit", name));
  }
  return {std::string(name), trim_newline(r.out)};
}

SourceTree GitRepository::read_tree(const RevisionRef& rev,
                                    Diagnostics* diag) const {
  SourceTree tree;
  if (rev.name == kWorktree) {
    const std::string listing =
        git({"ls-files", "-z", "--cached", "--others", "--exclude-standard"});
    std::vector<std::string> paths;
    for (auto p : split(listing, '\0')) {
      if (!p.empty()) paths.emplace_back(p);
    }
    std::sort(paths.begin(), paths.end());
    paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
    for (const auto& p : paths) {
      const auto full = toplevel_ / p;
      std::error_code ec;
      if (!std::filesystem::is_regular_file(full, ec)) continue;  // deleted
      std::ifstream in(full, std::ios::binary);
      if (!in) {
        warn(diag, fmt::format("{}: unreadable, skipped", p));
        continue;
      }
      std::ostringstream ss;
      ss << in.rdbuf();
      tree.push_back({p, ss.str()});
    }
    return tree;
  }

  const std::string listing =
      git({"ls-tree", "-r", "-z", "--full-tree", rev.resolved_id});
  std::vector<std::pair<std::string, std::string>> blobs;  // sha, path
  for (auto entry : split(listing, '\0')) {
    if (entry.empty()) continue;
    // "<mode> <type> <sha>\t<path>"
    const auto tab = entry.find('\t');
    if (tab == std::string_view::npos) continue;
    const auto fields = split(entry.substr(0, tab), ' ');
    if (fields.size() != 3 || fields[1] != "blob" || fields[0] == "120000") {
      continue;
    }
    blobs.emplace_back(std::string(fields[2]), std::string(entry.substr(tab + 1)));
  }
  std::sort(blobs.begin(), blobs.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });

  std::string request;
  for (const auto& [sha, path] : blobs) request += sha + "\n";
  const std::string out = git({"cat-file", "--batch"}, request);

  std::size_t pos = 0;
  for (const auto& [sha, path] : blobs) {
    const auto nl = out.find('\n', pos);
    if (nl == std::string::npos) {
      throw Error(ErrorKind::repository, "truncated git cat-file output");
    }
    const auto header = split(std::string_view(out).substr(pos, nl - pos), ' ');
    std::size_t size = 0;
    if (header.size() != 3 ||
        std::from_chars(header[2].data(), header[2].data() + header[2].size(),
                        size)
                .ec != std::errc{}) {
      throw Error(ErrorKind::repository, "unexpected git cat-file output");
    }
    tree.push_back({path, out.substr(nl + 1, size)});
    pos = nl + 1 + size + 1;
  }
  return tree;
}

Timestamp GitRepository::last_commit_time(const RevisionRef& rev,
                                          std::string_view path) const {
  const std::string commit =
      rev.name == kWorktree ? head_or_empty() : rev.resolved_id;
  if (commit.empty()) {
    throw Error(ErrorKind::path,
                fmt::format("{}: repository has no commits", path));
  }
  const ProcessResult exists = run_process(
      {"git", "cat-file", "-e", commit + ":" + std::string(path)}, toplevel_,
      {}, kGitEnv);
  if (exists.exit_code != 0) {
    throw Error(ErrorKind::path,
                fmt::format("{} does not exist at {}", path, rev.name));
  }
  const std::string out =
      git({"log", "-1",
           clock_ == CommitClock::committer ? "--format=%ct" : "--format=%at",
           commit, "--", std::string(path)});
  const std::string text = trim_newline(out);
  long long secs = 0;
  if (std::from_chars(text.data(), text.data() + text.size(), secs).ec !=
      std::errc{}) {
    throw Error(ErrorKind::repository,
                fmt::format("cannot read commit time of {}", path));
  }
  return Timestamp{std::chrono::seconds{secs}};
}

std::vector<RevisionRef> GitRepository::list_branches() const {
  const std::string out = git(
      {"for-each-ref", "--format=%(refname:short)%09%(objectname)", "refs/heads"});
  std::vector<RevisionRef> branches;
  for (auto line : split(out, '\n')) {
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) continue;
    branches.push_back({std::string(line.substr(0, tab)),
                        std::string(line.substr(tab + 1))});
  }
  std::sort(branches.begin(), branches.end(),
            [](const RevisionRef& a, const RevisionRef& b) {
              return a.name < b.name;
            });
  return branches;
}

}  // namespace reqtocode
