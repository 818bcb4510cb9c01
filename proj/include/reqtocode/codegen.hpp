#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reqtocode/lifecycle.hpp"
#include "reqtocode/requirements.hpp"

namespace reqtocode {

/// First line of every generated file (after the profile's comment prefix).
inline constexpr std::string_view kGeneratedSentinel =
    "GENERATED BY REQTOCODE \xE2\x80\x94 DO NOT EDIT";

bool has_generation_sentinel(std::string_view content);

/// The generated, referenceable projection of one requirement.
struct Traceable {
  std::string constant_name;
  std::string requirement_id;
  std::string title;
  TraceableState state;
  std::string set_name;
  // ("status", token), ("last_modified", RFC 3339), then ("scope", tag) when
  // the requirement has one.
  std::vector<std::pair<std::string, std::string>> metadata;

  std::optional<std::string> metadata_value(std::string_view key) const;
  std::string alias() const;
};

Traceable make_traceable(const Requirement& requirement,
                         std::string constant_name, std::string set_name,
                         TraceableState state);

/// The token a generated constant carries for its status: DEPRECATED while
/// in grace, otherwise the uppercased source status.
std::string generated_status(const Traceable& traceable);

enum class ArtifactKind { constant_module, marker_declarations, state_file };

struct GeneratedArtifact {
  std::string relative_path;  // '/'-separated, below the artifact root
  std::string content;        // LF line endings, exactly one trailing newline
  ArtifactKind kind = ArtifactKind::constant_module;

  friend bool operator==(const GeneratedArtifact&,
                         const GeneratedArtifact&) = default;
};

/// Template data for one target language. Built-in profiles are compiled in
/// from the repository's profiles/ directory; more can be loaded from disk.
struct LanguageProfile {
  std::string profile_id;
  std::string file_extension;
  std::string comment_prefix = "//";
  std::optional<std::string> deprecation_marker;
  std::string separator;
  std::string last_separator;
  // Rendered into {{alias_entry}} only when the alias differs from the
  // constant name, so the two never declare the same identifier twice.
  std::string alias_entry_template;
  std::string module_template;
  std::string constant_template;
  std::string markers_template;
};

std::vector<std::string> builtin_profile_ids();

/// Looks in `profiles_dir/<id>/` first (when given), then the built-ins.
LanguageProfile load_profile(std::string_view profile_id,
                             const std::optional<std::filesystem::path>&
                                 profiles_dir = std::nullopt);

/// Parses profile.ini text plus the three templates.
LanguageProfile parse_profile(std::string_view profile_id,
                              std::string_view profile_ini,
                              std::string module_template,
                              std::string constant_template,
                              std::string markers_template);

using TemplateVars = std::map<std::string, std::string, std::less<>>;

/// Replaces `{{name}}` placeholders. Unknown names throw Error(config).
std::string render_template(std::string_view tmpl, const TemplateVars& vars,
                            std::string_view template_name = "template");

/// Marker suffix derived from a set name (`SensorValidation_SWR` -> `SWR`).
std::string set_tag(std::string_view set_name);

/// Emits the constant module and the marker declarations of one set.
/// Constants appear in ascending requirement-id order. Throws
/// Error(collision) on duplicate constant names and std::invalid_argument if
/// a Traceable is Removed or belongs to a different set.
std::vector<GeneratedArtifact> generate_set(
    std::string_view set_name, std::span<const Traceable> traceables,
    const LanguageProfile& profile, std::string_view snapshot_hash);

// ---------------------------------------------------------------------------
// Lifecycle state file

inline constexpr std::string_view kStateFileName = "state.reqtocode";

/// Last-known data for one requirement id, persisted between sync cycles.
struct StateRecord {
  Requirement requirement;
  std::string set_name;       // empty if never generated
  std::string constant_name;  // empty if never generated
  TraceableState state;
  bool unmarked = false;  // Deprecated, but the profile has no marker

  friend bool operator==(const StateRecord& a, const StateRecord& b) {
    return a.requirement == b.requirement && a.set_name == b.set_name &&
           a.constant_name == b.constant_name && a.state == b.state &&
           a.unmarked == b.unmarked;
  }
};

/// One JSON object per line, sorted by id, behind the generation header.
GeneratedArtifact generate_state_file(std::span<const StateRecord> records,
                                      std::string_view snapshot_hash);

/// Throws Error(parse) with the offending line number.
std::vector<StateRecord> read_state_file(std::string_view content);

/// Every non-Removed record as a Traceable.
std::vector<Traceable> traceables_from_state(
    std::span<const StateRecord> records);

// ---------------------------------------------------------------------------
// Workspace update

struct PlannedWrite {
  std::string relative_path;
  std::string content;
};

struct WritePlan {
  std::vector<PlannedWrite> creates;
  std::vector<PlannedWrite> overwrites;
  std::vector<std::string> deletions;

  bool empty() const {
    return creates.empty() && overwrites.empty() && deletions.empty();
  }
};

/// Diffs the desired artifacts against what is on disk. Generated files no
/// longer produced are deleted; files without the generation header block
/// the plan with Error(foreign_file). The root must lie inside a git working
/// tree, else Error(placement).
WritePlan plan_workspace_update(std::span<const GeneratedArtifact> artifacts,
                                const std::filesystem::path& artifact_root);

/// Writes each file through a temporary sibling and rename.
void apply_plan(const WritePlan& plan,
                const std::filesystem::path& artifact_root);

}  // namespace reqtocode
