#include "reqtocode/cli.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <tuple>

#include "reqtocode/coverage.hpp"
#include "reqtocode/drift.hpp"

namespace reqtocode {

namespace {

namespace fs = std::filesystem;

std::optional<std::string> token_from_env() {
  if (const char* v = std::getenv(kTokenEnvVar); v != nullptr && *v != '\0') {
    return std::string(v);
  }
  return std::nullopt;
}

void print_warnings(const Diagnostics& diag, std::ostream& err) {
  for (const auto& w : diag.warnings) err << "warning: " << w << '\n';
}

GitRepository open_repo(const ToolConfig& cfg) {
  auto repo = GitRepository::open(cfg.repo_root, cfg.commit_clock);
  std::error_code ec;
  if (!fs::equivalent(repo.toplevel(), cfg.repo_root, ec)) {
    throw Error(ErrorKind::config,
                fmt::format("{} must sit at the repository root ({})",
                            kConfigFileName, repo.toplevel().string()));
  }
  return repo;
}

SourceSnapshot load_snapshot(const ToolConfig& cfg, Diagnostics* diag) {
  SourceSnapshot snap;
  if (cfg.source_files) {
    const fs::path dir = cfg.repo_root / *cfg.source_files;
    if (!fs::is_directory(dir)) {
      throw Error(ErrorKind::config,
                  fmt::format("requirement directory {} does not exist",
                              *cfg.source_files));
    }
    snap = load_from_files(dir, cfg.format, diag);
    snap.source_id = *cfg.source_files;
  } else {
    std::string endpoint = *cfg.source_alm;
    if (!endpoint.starts_with("http://") && !endpoint.starts_with("https://") &&
        fs::path(endpoint).is_relative()) {
      endpoint = (cfg.repo_root / endpoint).string();
    }
    snap = load_from_mock_alm(endpoint, token_from_env(), cfg.format, diag);
    snap.source_id = *cfg.source_alm;
  }
  return snap;
}

std::optional<fs::path> profiles_dir(const ToolConfig& cfg) {
  if (!cfg.profiles_dir) return std::nullopt;
  return cfg.repo_root / *cfg.profiles_dir;
}

std::string state_path(const ToolConfig& cfg) {
  return cfg.artifact_root + "/" + std::string(kStateFileName);
}

std::vector<StateRecord> state_at(const SourceTree& tree, const ToolConfig& cfg,
                                  const RevisionRef& rev) {
  const std::string path = state_path(cfg);
  for (const auto& f : tree) {
    if (f.path == path) return read_state_file(f.content);
  }
  throw Error(ErrorKind::path,
              fmt::format("{} not found at {}; run 'reqtocode sync' and commit "
                          "the generated files",
                          path, rev.name));
}

std::string describe_state(const TraceableState& s) {
  if (s.state != LifecycleState::deprecated || !s.grace_remaining) {
    return std::string(to_string(s.state));
  }
  return fmt::format("{} (grace {})", to_string(s.state), *s.grace_remaining);
}

// Everything a read-only command needs at one revision.
struct Analysis {
  RevisionRef revision;
  std::vector<StateRecord> records;
  std::vector<Traceable> traceables;
  ReferenceIndex index;
  ResolutionResult resolution;
};

Analysis analyze(const GitRepository& repo, const ToolConfig& cfg,
                 std::string_view revision, Diagnostics* diag) {
  Analysis a;
  a.revision = repo.resolve(revision);
  const SourceTree tree = repo.read_tree(a.revision, diag);
  a.records = state_at(tree, cfg, a.revision);
  a.traceables = traceables_from_state(a.records);
  a.index = scan_tree(tree, cfg.scan, diag);
  a.resolution = resolve(a.index, a.traceables);
  return a;
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path parent = fs::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) fs::create_directories(parent, ec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !(f << text) || !f.flush()) {
    throw Error(ErrorKind::io, fmt::format("cannot write {}", path));
  }
}

void post_json(const std::string& url, const std::string& body) {
  if (!url.starts_with("http://")) {
    throw Error(ErrorKind::transport,
                fmt::format("--post needs an http:// URL, got '{}'", url));
  }
  const auto path_start = url.find('/', std::string_view("http://").size());
  const std::string base = url.substr(0, path_start);
  const std::string path =
      path_start == std::string::npos ? "/" : url.substr(path_start);
  httplib::Client client(base);
  client.set_connection_timeout(5, 0);
  httplib::Headers headers;
  if (const auto token = token_from_env()) {
    headers.emplace("Authorization", "Bearer " + *token);
  }
  const auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    throw Error(ErrorKind::transport,
                fmt::format("POST {} failed: {}", url,
                            httplib::to_string(res.error())));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorKind::transport,
                fmt::format("POST {} returned HTTP {}", url, res->status));
  }
}

fs::path find_config(fs::path dir) {
  dir = fs::absolute(dir);
  for (;;) {
    if (fs::is_regular_file(dir / kConfigFileName)) return dir / kConfigFileName;
    if (!dir.has_parent_path() || dir.parent_path() == dir) break;
    dir = dir.parent_path();
  }
  throw Error(ErrorKind::config,
              fmt::format("no {} found in this directory or any parent",
                          kConfigFileName));
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_sync(const ToolConfig& cfg, std::ostream& out, std::ostream& err) {
  Diagnostics diag;
  const SourceSnapshot snap = load_snapshot(cfg, &diag);
  const LanguageProfile profile = load_profile(cfg.profile_id, profiles_dir(cfg));
  const fs::path root = cfg.artifact_dir();

  std::map<std::string, StateRecord> previous;
  if (const fs::path p = root / std::string(kStateFileName); fs::exists(p)) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    for (auto& r : read_state_file(text.str())) {
      const std::string id = r.requirement.id;
      previous.emplace(id, std::move(r));
    }
  }

  std::map<std::string, StateRecord> next;
  std::vector<Requirement> to_partition;
  for (const auto& req : snap.requirements) {
    const auto prev = previous.find(req.id);
    StateRecord rec;
    if (prev != previous.end()) rec = prev->second;
    const std::optional<TraceableState> prev_state =
        prev == previous.end() ? std::nullopt
                               : std::optional<TraceableState>(prev->second.state);
    try {
      rec.state = derive_state(req.status, prev_state, cfg.lifecycle,
                               req.last_modified);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("{}: {}", req.id, e.what()));
    }
    rec.requirement = req;
    if (rec.state.state != LifecycleState::removed) to_partition.push_back(req);
    next.emplace(req.id, std::move(rec));
  }
  for (const auto& [id, prev] : previous) {
    if (next.contains(id)) continue;
    StateRecord rec = prev;
    if (rec.state.state != LifecycleState::removed) {
      rec.state = absent_requirement_state(rec.state, cfg.lifecycle,
                                           rec.requirement.last_modified);
      warn(&diag, fmt::format("{} is no longer in the source; now {}", id,
                              describe_state(rec.state)));
    }
    next.emplace(id, std::move(rec));
  }

  for (const auto& part : partition(to_partition, snap.source_id,
                                    cfg.partition_rules)) {
    for (const auto& req : part.requirements) {
      next.at(req.id).set_name = part.set_name;
    }
  }

  std::vector<Requirement> live;
  for (const auto& [id, rec] : next) {
    if (rec.state.state != LifecycleState::removed) live.push_back(rec.requirement);
  }
  const auto names = assign_constant_names(live, cfg.naming, &diag);

  std::map<std::string, std::vector<Traceable>> by_set;
  for (const auto& rule : cfg.partition_rules) by_set[rule.set_name];
  for (auto& [id, rec] : next) {
    if (rec.state.state == LifecycleState::removed) {
      rec.unmarked = false;
      continue;
    }
    rec.constant_name = names.at(id);
    rec.unmarked = rec.state.state == LifecycleState::deprecated &&
                   !profile.deprecation_marker;
    if (rec.unmarked) {
      warn(&diag, fmt::format("{} is Deprecated but profile {} has no "
                              "deprecation marker",
                              id, profile.profile_id));
    }
    by_set[rec.set_name].push_back(make_traceable(
        rec.requirement, rec.constant_name, rec.set_name, rec.state));
  }

  const std::string hash = snapshot_hash(snap);
  std::vector<GeneratedArtifact> artifacts;
  for (const auto& [set_name, traceables] : by_set) {
    for (auto& a : generate_set(set_name, traceables, profile, hash)) {
      artifacts.push_back(std::move(a));
    }
  }
  std::vector<StateRecord> records;
  for (const auto& [id, rec] : next) records.push_back(rec);
  artifacts.push_back(generate_state_file(records, hash));

  const WritePlan plan = plan_workspace_update(artifacts, root);
  apply_plan(plan, root);

  print_warnings(diag, err);
  for (const auto& [id, rec] : next) {
    const auto prev = previous.find(id);
    if (prev == previous.end()) {
      out << fmt::format("new {} {}\n", id, describe_state(rec.state));
    } else if (prev->second.state != rec.state) {
      out << fmt::format("state {} {} -> {}\n", id,
                         describe_state(prev->second.state),
                         describe_state(rec.state));
    }
  }
  const auto shown = [&](const std::string& rel) {
    return cfg.artifact_root + "/" + rel;
  };
  for (const auto& w : plan.creates) out << "create " << shown(w.relative_path) << '\n';
  for (const auto& w : plan.overwrites) out << "overwrite " << shown(w.relative_path) << '\n';
  for (const auto& p : plan.deletions) out << "delete " << shown(p) << '\n';
  if (plan.empty()) out << "sync: no changes\n";
  return kExitClean;
}

int cmd_verify(const ToolConfig& cfg, const VerifyOptions& options,
               std::ostream& out, std::ostream& err) {
  Diagnostics diag;
  const GitRepository repo = open_repo(cfg);
  const Analysis a = analyze(repo, cfg, options.revision, &diag);

  std::map<std::string, std::string> retired;  // name -> requirement id
  for (const auto& r : a.records) {
    if (r.state.state != LifecycleState::removed) continue;
    if (!r.constant_name.empty()) retired.emplace(r.constant_name, r.requirement.id);
    try {
      retired.emplace(reference_alias(r.requirement.id), r.requirement.id);
    } catch (const Error&) {
      // ids without a valid alias are only reachable by constant name
    }
  }

  using Line = std::tuple<std::string, int, std::string, std::string, std::string>;
  std::vector<Line> lines;  // file, line, constant, level, message
  bool failed = false;
  for (const auto& ref : a.resolution.unresolved) {
    const auto gone = retired.find(ref.constant_name);
    const auto guess = near_miss(ref.constant_name, a.traceables);
    // Identifiers merely shaped like a constant are not trace references
    // unless they name a retired or near-miss Traceable.
    if (ref.marker == MarkerForm::bare && gone == retired.end() && !guess) continue;
    std::string message;
    if (gone != retired.end()) {
      message = fmt::format("requirement {} has been removed", gone->second);
    } else if (guess) {
      message = fmt::format("unknown Traceable; did you mean {}?", *guess);
    } else {
      message = "unknown Traceable";
    }
    lines.emplace_back(ref.file, ref.line, ref.constant_name, "ERROR", message);
    failed = true;
  }
  for (const auto& hit : a.resolution.deprecated_hits) {
    const auto& s = hit.traceable.state;
    std::string message =
        fmt::format("requirement {} is deprecated", hit.traceable.requirement_id);
    if (s.grace_remaining) {
      message += fmt::format("; removal in {} sync cycle(s)", *s.grace_remaining);
    }
    lines.emplace_back(hit.reference.file, hit.reference.line,
                       hit.reference.constant_name,
                       options.deny_deprecated ? "ERROR" : "WARNING", message);
    failed = failed || options.deny_deprecated;
  }
  std::sort(lines.begin(), lines.end());
  print_warnings(diag, err);
  for (const auto& [file, line, name, level, message] : lines) {
    out << fmt::format("{} {}:{} {} {}\n", level, file, line, name, message);
  }
  return failed ? kExitFinding : kExitClean;
}

int cmd_report(const ToolConfig& cfg, const ReportOptions& options,
               std::ostream& out, std::ostream& err) {
  const ReportFormat format = parse_report_format(options.format);
  if (options.set_filter) {
    const bool known = std::any_of(
        cfg.partition_rules.begin(), cfg.partition_rules.end(),
        [&](const PartitionRule& r) { return r.set_name == *options.set_filter; });
    if (!known) {
      throw Error(ErrorKind::usage,
                  fmt::format("unknown RequirementSet '{}'", *options.set_filter));
    }
  }

  Diagnostics diag;
  const GitRepository repo = open_repo(cfg);
  const Analysis a = analyze(repo, cfg, options.revision, &diag);

  std::optional<std::vector<DriftFinding>> drift;
  if (options.drift) {
    drift = detect_drift(a.traceables, a.resolution, a.revision, repo,
                         cfg.drift_tolerance, &diag);
  }

  ScopeContext scope;
  if (!options.all_scopes) {
    scope = a.revision.name == kWorktree ? repo.current_branch() : a.revision.name;
  }
  const CoverageReport coverage = compute_coverage(
      a.traceables, a.resolution, a.revision, options.set_filter, scope);

  std::string text;
  std::string json_text;
  if (options.baseline) {
    const RevisionRef base = repo.resolve(*options.baseline);
    const ReferenceIndex base_index =
        scan_tree(repo.read_tree(base, &diag), cfg.scan, &diag);
    const DeltaReport delta = compute_delta(a.index, base_index, a.traceables,
                                            a.revision, base, options.set_filter);
    text = render(delta, format, drift);
    if (options.post) json_text = render(delta, ReportFormat::json, drift);
  } else {
    text = render(coverage, format, drift);
    if (options.post) json_text = render(coverage, ReportFormat::json, drift);
  }

  print_warnings(diag, err);
  if (options.output) {
    write_text(*options.output, text);
  } else {
    out << text;
  }
  if (options.post) post_json(*options.post, json_text);

  if (options.min_coverage &&
      implementation_coverage_percent(coverage) < *options.min_coverage) {
    err << fmt::format("implementation coverage {:.1f}% is below the required "
                       "{:.1f}%\n",
                       implementation_coverage_percent(coverage),
                       *options.min_coverage);
    return kExitFinding;
  }
  return kExitClean;
}

int cmd_drift(const ToolConfig& cfg, const DriftOptions& options,
              std::ostream& out, std::ostream& err) {
  Diagnostics diag;
  const GitRepository repo = open_repo(cfg);
  const Analysis a = analyze(repo, cfg, options.revision, &diag);
  const auto findings =
      detect_drift(a.traceables, a.resolution, a.revision, repo,
                   options.tolerance.value_or(cfg.drift_tolerance), &diag);
  print_warnings(diag, err);
  for (const auto& f : findings) {
    std::string files;
    for (const auto& file : f.evidence_files) {
      files += (files.empty() ? "" : ",") + file;
    }
    out << fmt::format("DRIFT {} {} requirement={} code={} files={}\n",
                       f.requirement_id, to_string(f.direction),
                       format_timestamp(f.requirement_time),
                       format_timestamp(f.code_time), files);
  }
  return options.strict && !findings.empty() ? kExitFinding : kExitClean;
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Requirement traceability compiler", "reqtocode"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string revision{kWorktree};
  app.add_option("--config", config_path,
                 "Configuration file (default: reqtocode.ini in this or a "
                 "parent directory)");
  app.add_option("--revision", revision,
                 "Commit, branch or WORKTREE for the uncommitted tree");

  auto* sync = app.add_subcommand("sync", "Pull requirements, advance one "
                                          "lifecycle cycle, regenerate artifacts");

  VerifyOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "Check every trace reference");
  verify->add_flag("--deny-deprecated", verify_opts.deny_deprecated,
                   "Treat references to Deprecated Traceables as errors");

  ReportOptions report_opts;
  std::string baseline;
  std::string set_filter;
  std::string output;
  std::string post;
  double min_coverage = 0;
  bool no_drift = false;
  auto* report = app.add_subcommand("report", "Coverage or branch delta report");
  auto* baseline_opt =
      report->add_option("--baseline", baseline,
                         "Report only references new relative to this branch "
                         "(no value: the configured baseline)")
          ->expected(0, 1);
  report->add_option("--format", report_opts.format, "table or json");
  auto* set_opt = report->add_option("--set", set_filter, "Restrict to one RequirementSet");
  report->add_flag("--no-drift", no_drift, "Skip drift detection");
  report->add_flag("--all-scopes", report_opts.all_scopes,
                   "Show scoped Traceables of other branches too");
  auto* min_opt = report->add_option("--min-coverage", min_coverage,
                                     "Fail when implementation coverage (%) is lower")
                      ->check(CLI::Range(0.0, 100.0));
  auto* output_opt = report->add_option("--output", output, "Write the report to a file");
  auto* post_opt = report->add_option("--post", post,
                                      "POST the json report to an http:// URL");

  DriftOptions drift_opts;
  long long tolerance = -1;
  auto* drift = app.add_subcommand("drift", "Compare requirement and code timestamps");
  drift->add_flag("--strict-drift", drift_opts.strict, "Exit 1 when drift is found");
  auto* tol_opt = drift->add_option("--tolerance", tolerance,
                                    "Tolerance in seconds (overrides the config)")
                      ->check(CLI::NonNegativeNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitClean;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitClean;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << '\n';
    return kExitOperational;
  }

  try {
    const ToolConfig cfg = load_tool_config(
        config_path.empty() ? find_config(fs::current_path()) : fs::path(config_path));
    if (*sync) {
      if (revision != kWorktree) {
        throw Error(ErrorKind::usage, "sync always writes the working tree; "
                                      "--revision does not apply");
      }
      return cmd_sync(cfg, out, err);
    }
    if (*verify) {
      verify_opts.revision = revision;
      return cmd_verify(cfg, verify_opts, out, err);
    }
    if (*report) {
      report_opts.revision = revision;
      if (baseline_opt->count() > 0) {
        if (!baseline.empty()) {
          report_opts.baseline = baseline;
        } else if (cfg.baseline) {
          report_opts.baseline = cfg.baseline;
        } else {
          throw Error(ErrorKind::usage,
                      "--baseline without a value needs [report] baseline");
        }
      }
      if (set_opt->count() > 0) report_opts.set_filter = set_filter;
      if (min_opt->count() > 0) report_opts.min_coverage = min_coverage;
      if (output_opt->count() > 0) report_opts.output = output;
      if (post_opt->count() > 0) report_opts.post = post;
      report_opts.drift = !no_drift;
      return cmd_report(cfg, report_opts, out, err);
    }
    drift_opts.revision = revision;
    if (tol_opt->count() > 0) drift_opts.tolerance = std::chrono::seconds(tolerance);
    return cmd_drift(cfg, drift_opts, out, err);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kExitOperational;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kExitOperational;
  }
}

}  // namespace reqtocode
