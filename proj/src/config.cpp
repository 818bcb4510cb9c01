#include "reqtocode/config.hpp"

#include <fmt/format.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace reqtocode {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void fail(std::string_view section, std::string_view key,
                       std::string_view what) {
  throw Error(ErrorKind::config,
              fmt::format("[{}] {}: {}", section, key, what));
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_bool(std::string_view section, std::string_view key,
                std::string_view v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  fail(section, key, fmt::format("expected a boolean, got '{}'", v));
}

long long parse_int(std::string_view section, std::string_view key,
                    std::string_view v, long long min) {
  long long n = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc{} || p != v.data() + v.size() || n < min) {
    fail(section, key,
         fmt::format("expected an integer >= {}, got '{}'", min, v));
  }
  return n;
}

// "90", "90s", "15m", "2h", "1d".
std::chrono::seconds parse_duration(std::string_view section,
                                    std::string_view key, std::string_view v) {
  long long scale = 1;
  std::string_view digits = v;
  if (!v.empty()) {
    switch (v.back()) {
      case 's': scale = 1; break;
      case 'm': scale = 60; break;
      case 'h': scale = 3600; break;
      case 'd': scale = 86400; break;
      default: scale = 0;
    }
    if (scale != 0) digits.remove_suffix(1); else scale = 1;
  }
  return std::chrono::seconds(parse_int(section, key, digits, 0) * scale);
}

bool safe_relative(std::string_view p) {
  if (p.empty() || p.front() == '/') return false;
  for (const auto& part : std::filesystem::path(p)) {
    if (part == "..") return false;
  }
  return true;
}

// `category:GLOB [source:GLOB]`, several rules separated by ';'.
std::vector<PartitionRule> parse_partition(const std::string& set_name,
                                           std::string_view value) {
  std::vector<PartitionRule> rules;
  std::size_t start = 0;
  while (start <= value.size()) {
    auto end = value.find(';', start);
    if (end == std::string_view::npos) end = value.size();
    const auto words = split_words(value.substr(start, end - start));
    start = end + 1;
    if (words.empty()) continue;
    PartitionRule rule;
    rule.set_name = set_name;
    for (const auto& w : words) {
      const auto colon = w.find(':');
      if (colon == std::string::npos || colon + 1 == w.size()) {
        fail("partition", set_name,
             fmt::format("expected category:GLOB or source:GLOB, got '{}'", w));
      }
      const auto field = w.substr(0, colon);
      if (field == "category") {
        rule.category_pattern = w.substr(colon + 1);
      } else if (field == "source") {
        rule.source_pattern = w.substr(colon + 1);
      } else {
        fail("partition", set_name, fmt::format("unknown field '{}'", field));
      }
    }
    rules.push_back(std::move(rule));
  }
  if (rules.empty()) fail("partition", set_name, "no rule given");
  return rules;
}

void apply_to_grammars(GrammarSet& set, auto&& fn) {
  fn(set.fallback);
  for (auto& [ext, g] : set.by_extension) fn(g);
}

void read_source(const pt::ptree& sec, ToolConfig& cfg) {
  for (const auto& [key, node] : sec) {
    const auto v = trim(node.data());
    if (key == "files") {
      if (!safe_relative(v)) fail("source", key, "must be a relative path inside the repository");
      cfg.source_files = v;
    } else if (key == "alm") {
      if (v.empty()) fail("source", key, "empty endpoint");
      cfg.source_alm = v;
    } else if (key == "statuses") {
      cfg.format.status_vocabulary = split_words(v);
      if (cfg.format.status_vocabulary.empty()) fail("source", key, "empty vocabulary");
    } else if (key == "extensions") {
      cfg.format.extensions = split_words(v);
    } else {
      fail("source", key, "unknown key");
    }
  }
}

void read_lifecycle(const pt::ptree& sec, ToolConfig& cfg) {
  for (const auto& [key, node] : sec) {
    const auto v = trim(node.data());
    if (key == "grace_cycles") {
      cfg.lifecycle.grace_cycles =
          static_cast<int>(parse_int("lifecycle", key, v, 0));
    } else if (key == "lifecycle_info_available") {
      cfg.lifecycle.lifecycle_info_available = parse_bool("lifecycle", key, v);
    } else if (key.starts_with("status.") && key.size() > 7) {
      const auto intent = parse_intent(v);
      if (!intent) fail("lifecycle", key, "expected active, deprecated or removed");
      cfg.lifecycle.status_map[key.substr(7)] = *intent;
    } else {
      fail("lifecycle", key, "unknown key");
    }
  }
}

void read_codegen(const pt::ptree& sec, ToolConfig& cfg) {
  for (const auto& [key, node] : sec) {
    const auto v = trim(node.data());
    if (key == "profile") {
      cfg.profile_id = v;
    } else if (key == "artifact_root") {
      if (!safe_relative(v)) fail("codegen", key, "must be a relative path inside the repository");
      cfg.artifact_root = std::filesystem::path(v).lexically_normal().generic_string();
      while (cfg.artifact_root.ends_with('/')) cfg.artifact_root.pop_back();
    } else if (key == "max_name_length") {
      cfg.naming.max_length =
          static_cast<std::size_t>(parse_int("codegen", key, v, 16));
    } else if (key == "profiles_dir") {
      cfg.profiles_dir = v;
    } else {
      fail("codegen", key, "unknown key");
    }
  }
}

void read_scan(const pt::ptree& sec, ToolConfig& cfg) {
  auto& scan = cfg.scan;
  for (const auto& [key, node] : sec) {
    const auto v = trim(node.data());
    if (key == "include") {
      scan.include = split_words(v);
    } else if (key == "exclude") {
      scan.exclude = split_words(v);
    } else if (key == "test_globs") {
      scan.test_globs = split_words(v);
    } else if (key == "threads") {
      scan.threads = static_cast<unsigned>(parse_int("scan", key, v, 0));
    } else if (key.starts_with("grammar.") && key.size() > 8) {
      const auto ext = key.substr(8);
      if (v == "c-like") {
        scan.grammars.by_extension[ext] = MarkerGrammar::c_like();
      } else if (v == "hash") {
        scan.grammars.by_extension[ext] = MarkerGrammar::hash_comments();
      } else {
        fail("scan", key, "expected c-like or hash");
      }
    } else if (key == "bare_references" || key == "trace_calls" ||
               key == "verify_calls" || key == "implementation_markers" ||
               key == "test_markers") {
      // Applied after every grammar.<ext> key has been seen.
    } else {
      fail("scan", key, "unknown key");
    }
  }

  for (const auto& [key, node] : sec) {
    const auto v = trim(node.data());
    if (key == "bare_references") {
      std::optional<std::regex> bare;
      if (v == "off" || v == "false") {
        bare.reset();
      } else if (v == "on" || v == "true" || v == "default") {
        bare = std::regex(std::string(kDefaultBareReferencePattern));
      } else {
        try {
          bare = std::regex(v);
        } catch (const std::regex_error& e) {
          fail("scan", key, fmt::format("invalid pattern: {}", e.what()));
        }
      }
      apply_to_grammars(scan.grammars,
                        [&](MarkerGrammar& g) { g.bare_reference = bare; });
    } else if (key == "trace_calls") {
      apply_to_grammars(scan.grammars, [&](MarkerGrammar& g) {
        g.trace_calls = split_words(v);
      });
    } else if (key == "verify_calls") {
      apply_to_grammars(scan.grammars, [&](MarkerGrammar& g) {
        g.verify_calls = split_words(v);
      });
    } else if (key == "implementation_markers") {
      apply_to_grammars(scan.grammars, [&](MarkerGrammar& g) {
        g.implementation_marker_prefixes = split_words(v);
      });
    } else if (key == "test_markers") {
      apply_to_grammars(scan.grammars, [&](MarkerGrammar& g) {
        g.test_marker_prefixes = split_words(v);
      });
    }
  }
}

void read_report(const pt::ptree& sec, ToolConfig& cfg) {
  for (const auto& [key, node] : sec) {
    const auto v = trim(node.data());
    if (key == "baseline") {
      if (v.empty()) fail("report", key, "empty branch name");
      cfg.baseline = v;
    } else if (key == "drift_tolerance") {
      cfg.drift_tolerance = parse_duration("report", key, v);
    } else if (key == "commit_time") {
      if (v == "committer") {
        cfg.commit_clock = CommitClock::committer;
      } else if (v == "author") {
        cfg.commit_clock = CommitClock::author;
      } else {
        fail("report", key, "expected committer or author");
      }
    } else {
      fail("report", key, "unknown key");
    }
  }
}

}  // namespace

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  auto alpha = [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
  };
  if (!alpha(text.front())) return false;
  for (char c : text) {
    if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
  }
  return true;
}

ToolConfig parse_tool_config(std::string_view ini_text,
                             const std::filesystem::path& repo_root) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(ini_text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::config,
                fmt::format("{} line {}: {}", kConfigFileName, e.line(),
                            e.message()));
  }

  ToolConfig cfg;
  cfg.repo_root = repo_root;
  for (const auto& [name, sec] : tree) {
    if (sec.empty() && !sec.data().empty()) {
      fail("", name, "key outside of any section");
    }
    if (name == "source") {
      read_source(sec, cfg);
    } else if (name == "partition") {
      for (const auto& [set_name, node] : sec) {
        if (!is_identifier(set_name)) {
          fail("partition", set_name, "set name must be an identifier");
        }
        for (auto& rule : parse_partition(set_name, node.data())) {
          cfg.partition_rules.push_back(std::move(rule));
        }
      }
    } else if (name == "lifecycle") {
      read_lifecycle(sec, cfg);
    } else if (name == "codegen") {
      read_codegen(sec, cfg);
    } else if (name == "scan") {
      read_scan(sec, cfg);
    } else if (name == "report") {
      read_report(sec, cfg);
    } else {
      throw Error(ErrorKind::config, fmt::format("unknown section [{}]", name));
    }
  }

  if (cfg.source_files.has_value() == cfg.source_alm.has_value()) {
    throw Error(ErrorKind::config,
                "[source] needs exactly one of 'files' or 'alm'");
  }
  if (cfg.partition_rules.empty()) {
    throw Error(ErrorKind::config, "[partition] declares no RequirementSet");
  }
  cfg.lifecycle.validate(cfg.format.status_vocabulary);

  cfg.scan.artifact_root = cfg.artifact_root;
  if (cfg.source_files) {
    auto dir = std::filesystem::path(*cfg.source_files)
                   .lexically_normal()
                   .generic_string();
    while (dir.ends_with('/')) dir.pop_back();
    if (dir != ".") cfg.scan.exclude.push_back(dir + "/**");
  }
  return cfg;
}

ToolConfig load_tool_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::config,
                fmt::format("cannot read configuration {}", path.string()));
  }
  std::ostringstream text;
  text << in.rdbuf();
  auto root = std::filesystem::absolute(path).parent_path();
  return parse_tool_config(text.str(), root.lexically_normal());
}

}  // namespace reqtocode
