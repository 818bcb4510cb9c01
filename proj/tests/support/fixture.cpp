#include "fixture.hpp"

#include <fmt/format.h>

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "reqtocode/cli.hpp"
#include "reqtocode/error.hpp"

namespace rtc_test {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::random_device rd;
  std::mt19937_64 gen(rd());
  for (int attempt = 0; attempt < 100; ++attempt) {
    fs::path p = fs::temp_directory_path() /
                 fmt::format("reqtocode-test-{:016x}", gen());
    if (fs::create_directory(p)) {
      path_ = fs::canonical(p);
      return;
    }
  }
  throw std::runtime_error("cannot create a temporary directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

reqtocode::EnvOverrides git_env(const std::string& date = "2026-01-01T00:00:00Z") {
  return {{"GIT_CONFIG_GLOBAL", "/dev/null"},
          {"GIT_CONFIG_NOSYSTEM", "1"},
          {"GIT_AUTHOR_NAME", "Fixture"},
          {"GIT_AUTHOR_EMAIL", "fixture@example.invalid"},
          {"GIT_COMMITTER_NAME", "Fixture"},
          {"GIT_COMMITTER_EMAIL", "fixture@example.invalid"},
          {"GIT_AUTHOR_DATE", date},
          {"GIT_COMMITTER_DATE", date},
          {"LC_ALL", "C"}};
}

std::string run_git(const fs::path& cwd, std::vector<std::string> args,
                    const reqtocode::EnvOverrides& env) {
  args.insert(args.begin(), "git");
  const auto r = reqtocode::run_process(args, cwd, {}, env);
  if (r.exit_code != 0) {
    std::string cmd;
    for (const auto& a : args) cmd += a + " ";
    throw std::runtime_error(fmt::format("{}failed: {}", cmd, r.err));
  }
  return r.out;
}

}  // namespace

GitFixture::GitFixture() {
  git({"init", "-q", "-b", "main"});
  git({"config", "commit.gpgsign", "false"});
  git({"config", "core.autocrlf", "false"});
}

void GitFixture::write(const std::string& rel, const std::string& content) const {
  const fs::path p = root() / rel;
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary | std::ios::trunc) << content;
}

std::string GitFixture::read(const std::string& rel) const {
  std::ifstream in(root() / rel, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + rel);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void GitFixture::remove(const std::string& rel) const { fs::remove_all(root() / rel); }

bool GitFixture::exists(const std::string& rel) const {
  return fs::exists(root() / rel);
}

std::string GitFixture::commit(const std::string& message,
                               const std::string& iso_date) const {
  run_git(root(), {"add", "-A"}, git_env(iso_date));
  run_git(root(), {"commit", "-q", "--allow-empty", "-m", message},
          git_env(iso_date));
  auto hash = run_git(root(), {"rev-parse", "HEAD"}, git_env());
  while (!hash.empty() && hash.back() == '\n') hash.pop_back();
  return hash;
}

void GitFixture::checkout(const std::string& branch, bool create) const {
  if (create) {
    git({"checkout", "-q", "-b", branch});
  } else {
    git({"checkout", "-q", branch});
  }
}

std::string GitFixture::git(std::vector<std::string> args) const {
  return run_git(root(), std::move(args), git_env());
}

CliResult GitFixture::cli(std::vector<std::string> args) const {
  args.insert(args.begin(), (root() / "reqtocode.ini").string());
  args.insert(args.begin(), "--config");
  std::ostringstream out;
  std::ostringstream err;
  CliResult r;
  r.exit_code = reqtocode::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string requirement_file(const std::string& id, const std::string& title,
                             const std::string& status,
                             const std::string& last_modified,
                             const std::string& category,
                             const std::optional<std::string>& scope) {
  std::string text = fmt::format(
      "---\nid: {}\ntitle: {}\nstatus: {}\nlast_modified: {}\ncategory: {}\n",
      id, title, status, last_modified, category);
  if (scope) text += fmt::format("scope: {}\n", *scope);
  text += "---\n\nDescription of " + id + ".\n";
  return text;
}

void put_requirement(const GitFixture& repo, const std::string& id,
                     const std::string& title, const std::string& status,
                     const std::string& last_modified,
                     const std::optional<std::string>& scope) {
  repo.write("requirements/" + id + ".md",
             requirement_file(id, title, status, last_modified, "SWR", scope));
}

int count_lines_starting(const std::string& text, const std::string& prefix) {
  int n = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(prefix, 0) == 0) ++n;
  }
  return n;
}

void FakeVcs::add_revision(const std::string& name, reqtocode::SourceTree tree) {
  trees_[name] = std::move(tree);
}

void FakeVcs::set_commit_time(const std::string& rev, const std::string& path,
                              reqtocode::Timestamp t) {
  times_[{rev, path}] = t;
}

reqtocode::RevisionRef FakeVcs::resolve(std::string_view name) const {
  if (!trees_.contains(std::string(name))) {
    throw reqtocode::Error(reqtocode::ErrorKind::revision,
                           "unknown revision " + std::string(name));
  }
  return {std::string(name), "id-" + std::string(name)};
}

reqtocode::SourceTree FakeVcs::read_tree(const reqtocode::RevisionRef& rev,
                                         reqtocode::Diagnostics*) const {
  return trees_.at(rev.name);
}

reqtocode::Timestamp FakeVcs::last_commit_time(const reqtocode::RevisionRef& rev,
                                               std::string_view path) const {
  ++commit_time_lookups;
  const auto it = times_.find({rev.name, std::string(path)});
  if (it == times_.end()) {
    throw reqtocode::Error(reqtocode::ErrorKind::path,
                           std::string(path) + " has no history");
  }
  return it->second;
}

std::vector<reqtocode::RevisionRef> FakeVcs::list_branches() const {
  std::vector<reqtocode::RevisionRef> out;
  for (const auto& [name, tree] : trees_) out.push_back(resolve(name));
  return out;
}

reqtocode::Timestamp ts(const std::string& rfc3339) {
  const auto t = reqtocode::parse_timestamp(rfc3339);
  if (!t) throw std::invalid_argument("bad timestamp " + rfc3339);
  return *t;
}

}  // namespace rtc_test
