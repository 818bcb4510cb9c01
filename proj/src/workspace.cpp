#include <fmt/format.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "reqtocode/codegen.hpp"

namespace reqtocode {
namespace {

namespace fs = std::filesystem;

bool inside_git_worktree(const fs::path& dir) {
  for (fs::path p = dir; !p.empty(); p = p.parent_path()) {
    std::error_code ec;
    if (fs::exists(p / ".git", ec)) return true;
    if (p == p.parent_path()) break;
  }
  return false;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomically(const fs::path& target, std::string_view content) {
  fs::create_directories(target.parent_path());
  const fs::path tmp = target.parent_path() /
                       fmt::format(".{}.tmp{}", target.filename().string(),
                                   ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot replace " + target.string());
  }
}

}  // namespace

WritePlan plan_workspace_update(std::span<const GeneratedArtifact> artifacts,
                                const fs::path& artifact_root) {
  const fs::path root = fs::absolute(artifact_root).lexically_normal();
  if (!inside_git_worktree(root)) {
    throw Error(ErrorKind::placement,
                fmt::format("artifact root {} is not inside a version-controlled "
                            "working tree",
                            root.string()));
  }

  std::map<std::string, const GeneratedArtifact*> wanted;
  for (const auto& a : artifacts) wanted.emplace(a.relative_path, &a);

  WritePlan plan;
  std::vector<std::string> foreign;
  std::error_code ec;
  if (fs::is_directory(root, ec)) {
    std::vector<std::string> existing;
    for (auto it = fs::recursive_directory_iterator(root, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
      if (ec) break;
      if (it->is_regular_file()) {
        existing.push_back(fs::relative(it->path(), root).generic_string());
      }
    }
    std::sort(existing.begin(), existing.end());
    for (const auto& rel : existing) {
      if (wanted.contains(rel)) continue;
      if (has_generation_sentinel(read_all(root / rel))) {
        plan.deletions.push_back(rel);
      } else {
        foreign.push_back(rel);
      }
    }
  }
  if (!foreign.empty()) {
    std::string list;
    for (const auto& f : foreign) list += (list.empty() ? "" : ", ") + f;
    throw Error(ErrorKind::foreign_file,
                fmt::format("refusing to touch files without the generation "
                            "header in {}: {}",
                            root.string(), list));
  }

  for (const auto& [rel, artifact] : wanted) {
    const fs::path target = root / rel;
    if (!fs::exists(target, ec)) {
      plan.creates.push_back({rel, artifact->content});
    } else if (read_all(target) != artifact->content) {
      plan.overwrites.push_back({rel, artifact->content});
    }
  }
  return plan;
}

void apply_plan(const WritePlan& plan, const fs::path& artifact_root) {
  const fs::path root = fs::absolute(artifact_root).lexically_normal();
  for (const auto& w : plan.creates) write_atomically(root / w.relative_path, w.content);
  for (const auto& w : plan.overwrites) write_atomically(root / w.relative_path, w.content);
  for (const auto& rel : plan.deletions) {
    std::error_code ec;
    fs::remove(root / rel, ec);
    if (ec) throw Error(ErrorKind::io, "cannot delete " + (root / rel).string());
    for (fs::path dir = (root / rel).parent_path(); dir != root && dir.has_parent_path();
         dir = dir.parent_path()) {
      if (!fs::is_empty(dir, ec) || ec) break;
      fs::remove(dir, ec);
    }
  }
}

}  // namespace reqtocode
