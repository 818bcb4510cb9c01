#include "reqtocode/codegen.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "builtin_profiles.hpp"
#include "reqtocode/naming.hpp"

namespace reqtocode {
namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = char(c - 'a' + 'A');
  }
  return out;
}

std::string unescape_value(std::string_view v) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') return std::string(v);
  v = v.substr(1, v.size() - 2);
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != '\\' || i + 1 == v.size()) {
      out.push_back(v[i]);
      continue;
    }
    switch (v[++i]) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case '"': out.push_back('"'); break;
      case '\\': out.push_back('\\'); break;
      default:
        out.push_back('\\');
        out.push_back(v[i]);
    }
  }
  return out;
}

// Body of a double-quoted C/Java string literal.
std::string escape_literal(std::string_view v) {
  std::string out;
  for (char c : v) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          out += fmt::format("\\{:03o}", static_cast<unsigned char>(c));
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// LF endings and exactly one trailing newline.
std::string normalize_text(std::string text) {
  std::string out;
  out.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n') continue;
    out.push_back(text[i]);
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  out.push_back('\n');
  return out;
}

std::string header(const LanguageProfile& profile, std::string_view hash) {
  return fmt::format("{0} {1}\n{0} snapshot {2}\n", profile.comment_prefix,
                     kGeneratedSentinel, hash);
}

}  // namespace

bool has_generation_sentinel(std::string_view content) {
  const auto nl = content.find('\n');
  return content.substr(0, nl).find(kGeneratedSentinel) !=
         std::string_view::npos;
}

std::optional<std::string> Traceable::metadata_value(
    std::string_view key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string Traceable::alias() const { return reference_alias(requirement_id); }

Traceable make_traceable(const Requirement& requirement,
                         std::string constant_name, std::string set_name,
                         TraceableState state) {
  Traceable t;
  t.constant_name = std::move(constant_name);
  t.requirement_id = requirement.id;
  t.title = requirement.title;
  t.state = state;
  t.set_name = std::move(set_name);
  t.metadata.emplace_back("status", requirement.status);
  t.metadata.emplace_back("last_modified",
                          format_timestamp(requirement.last_modified));
  if (requirement.scope) t.metadata.emplace_back("scope", *requirement.scope);
  return t;
}

std::string generated_status(const Traceable& traceable) {
  if (traceable.state.state == LifecycleState::deprecated) return "DEPRECATED";
  return upper(normalize_segment(traceable.metadata_value("status").value_or("")));
}

std::string set_tag(std::string_view set_name) {
  const auto us = set_name.rfind('_');
  if (us == std::string_view::npos || us + 1 == set_name.size()) {
    return std::string(set_name);
  }
  return std::string(set_name.substr(us + 1));
}

std::string render_template(std::string_view tmpl, const TemplateVars& vars,
                            std::string_view template_name) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      throw Error(ErrorKind::config,
                  fmt::format("{}: unterminated placeholder", template_name));
    }
    const std::string_view name = tmpl.substr(open + 2, close - open - 2);
    const auto it = vars.find(name);
    if (it == vars.end()) {
      throw Error(ErrorKind::config, fmt::format("{}: unknown placeholder {{{{{}}}}}",
                                                 template_name, name));
    }
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

LanguageProfile parse_profile(std::string_view profile_id,
                              std::string_view profile_ini,
                              std::string module_template,
                              std::string constant_template,
                              std::string markers_template) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(profile_ini)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::config, fmt::format("profile {}: profile.ini line {}: {}",
                                               profile_id, e.line(),
                                               e.message()));
  }
  LanguageProfile p;
  p.profile_id = std::string(profile_id);
  const auto get = [&](const char* key) -> std::optional<std::string> {
    const auto it = tree.find(key);
    if (it == tree.not_found()) return std::nullopt;
    return unescape_value(it->second.data());
  };
  const auto extension = get("extension");
  if (!extension || extension->empty()) {
    throw Error(ErrorKind::config,
                fmt::format("profile {}: 'extension' is required", profile_id));
  }
  p.file_extension = *extension;
  p.comment_prefix = get("comment_prefix").value_or("//");
  p.deprecation_marker = get("deprecation_marker");
  if (p.deprecation_marker && p.deprecation_marker->empty()) {
    p.deprecation_marker.reset();
  }
  p.separator = get("separator").value_or("");
  p.last_separator = get("last_separator").value_or(p.separator);
  p.alias_entry_template = get("alias_entry").value_or("");
  p.module_template = std::move(module_template);
  p.constant_template = std::move(constant_template);
  p.markers_template = std::move(markers_template);
  return p;
}

std::vector<std::string> builtin_profile_ids() {
  std::set<std::string> ids;
  for (const auto& f : detail::builtin_profile_files()) {
    ids.emplace(f.path.substr(0, f.path.find('/')));
  }
  return {ids.begin(), ids.end()};
}

LanguageProfile load_profile(
    std::string_view profile_id,
    const std::optional<std::filesystem::path>& profiles_dir) {
  if (profiles_dir) {
    const auto dir = *profiles_dir / std::string(profile_id);
    if (std::filesystem::is_directory(dir)) {
      return parse_profile(profile_id, read_text(dir / "profile.ini"),
                           read_text(dir / "module.tmpl"),
                           read_text(dir / "constant.tmpl"),
                           read_text(dir / "markers.tmpl"));
    }
  }
  std::map<std::string, std::string, std::less<>> files;
  const std::string prefix = std::string(profile_id) + "/";
  for (const auto& f : detail::builtin_profile_files()) {
    if (f.path.starts_with(prefix)) {
      files.emplace(std::string(f.path.substr(prefix.size())), f.content);
    }
  }
  if (files.empty()) {
    throw Error(ErrorKind::config,
                fmt::format("unknown language profile '{}'", profile_id));
  }
  const auto need = [&](const char* name) {
    const auto it = files.find(name);
    if (it == files.end()) {
      throw Error(ErrorKind::config, fmt::format("profile {} lacks {}",
                                                 profile_id, name));
    }
    return it->second;
  };
  return parse_profile(profile_id, need("profile.ini"), need("module.tmpl"),
                       need("constant.tmpl"), need("markers.tmpl"));
}

std::vector<GeneratedArtifact> generate_set(
    std::string_view set_name, std::span<const Traceable> traceables,
    const LanguageProfile& profile, std::string_view snapshot_hash) {
  std::vector<const Traceable*> ordered;
  std::map<std::string, std::string> owner;
  for (const auto& t : traceables) {
    if (t.set_name != set_name) {
      throw std::invalid_argument(fmt::format(
          "Traceable {} belongs to set {}, not {}", t.requirement_id,
          t.set_name, set_name));
    }
    if (t.state.state == LifecycleState::removed) {
      throw std::invalid_argument(fmt::format(
          "Removed Traceable {} cannot be emitted", t.requirement_id));
    }
    if (auto [it, fresh] = owner.emplace(t.constant_name, t.requirement_id);
        !fresh) {
      throw Error(ErrorKind::collision,
                  fmt::format("constant name {} used by both {} and {}",
                              t.constant_name, it->second, t.requirement_id));
    }
    ordered.push_back(&t);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const Traceable* a, const Traceable* b) {
              return a->requirement_id < b->requirement_id;
            });

  const std::string tag = set_tag(set_name);
  const std::string set_upper = upper(set_name);

  std::string constants;
  std::set<std::string> statuses;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const Traceable& t = *ordered[i];
    const std::string status = generated_status(t);
    statuses.insert(status);
    const bool deprecated = t.state.state == LifecycleState::deprecated;
    TemplateVars vars{
        {"set_name", std::string(set_name)},
        {"set_name_upper", set_upper},
        {"set_tag", tag},
        {"constant_name", t.constant_name},
        {"requirement_id", t.requirement_id},
        {"requirement_alias", t.alias()},
        {"title", t.title},
        {"title_literal", escape_literal(t.title)},
        {"index", std::to_string(i)},
        {"status", status},
        {"last_modified", t.metadata_value("last_modified").value_or("-")},
        {"scope", t.metadata_value("scope").value_or("-")},
        {"deprecation_marker",
         deprecated ? profile.deprecation_marker.value_or("") : ""},
        {"separator",
         i + 1 == ordered.size() ? profile.last_separator : profile.separator},
    };
    vars["alias_entry"] =
        t.alias() == t.constant_name
            ? std::string()
            : render_template(profile.alias_entry_template, vars,
                              profile.profile_id + "/alias_entry");
    constants += render_template(profile.constant_template, vars,
                                 profile.profile_id + "/constant.tmpl");
  }
  std::string status_values;
  for (const auto& s : statuses) {
    status_values += (status_values.empty() ? "" : ", ") + s;
  }

  const TemplateVars set_vars{
      {"set_name", std::string(set_name)},
      {"set_name_upper", set_upper},
      {"set_tag", tag},
      {"constants", constants},
      {"status_values", status_values},
  };
  const std::string hdr = header(profile, snapshot_hash);
  const std::string dir = std::string(set_name) + "/";

  std::vector<GeneratedArtifact> out;
  out.push_back({dir + std::string(set_name) + "." + profile.file_extension,
                 normalize_text(hdr + render_template(
                                          profile.module_template, set_vars,
                                          profile.profile_id + "/module.tmpl")),
                 ArtifactKind::constant_module});
  out.push_back({dir + "markers." + profile.file_extension,
                 normalize_text(hdr + render_template(
                                          profile.markers_template, set_vars,
                                          profile.profile_id + "/markers.tmpl")),
                 ArtifactKind::marker_declarations});
  return out;
}

}  // namespace reqtocode
