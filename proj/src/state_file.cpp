#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>

#include "reqtocode/codegen.hpp"

namespace reqtocode {
namespace {

using nlohmann::json;

std::string string_field(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorKind::parse,
                fmt::format("{}:{}: missing string field '{}'", kStateFileName,
                            line, key));
  }
  return it->get<std::string>();
}

}  // namespace

GeneratedArtifact generate_state_file(std::span<const StateRecord> records,
                                      std::string_view snapshot_hash) {
  std::vector<const StateRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const StateRecord* a, const StateRecord* b) {
              return a->requirement.id < b->requirement.id;
            });

  std::string content = fmt::format("# {}\n# snapshot {}\n", kGeneratedSentinel,
                                    snapshot_hash);
  for (const StateRecord* r : sorted) {
    const Requirement& req = r->requirement;
    json line{{"id", req.id},
              {"title", req.title},
              {"status", req.status},
              {"last_modified", format_timestamp(req.last_modified)},
              {"category", req.category},
              {"set", r->set_name},
              {"constant", r->constant_name},
              {"state", std::string(to_string(r->state.state))}};
    if (req.scope) line["scope"] = *req.scope;
    if (r->state.deprecated_since) {
      line["deprecated_since"] = format_timestamp(*r->state.deprecated_since);
    }
    if (r->state.grace_remaining) {
      line["grace_remaining"] = *r->state.grace_remaining;
    }
    if (r->unmarked) line["unmarked"] = true;
    content += line.dump();
    content += '\n';
  }
  return {std::string(kStateFileName), std::move(content),
          ArtifactKind::state_file};
}

std::vector<StateRecord> read_state_file(std::string_view content) {
  std::vector<StateRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    ++line_no;
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::parse, fmt::format("{}:{}: {}", kStateFileName,
                                                line_no, e.what()));
    }
    if (!obj.is_object()) {
      throw Error(ErrorKind::parse, fmt::format("{}:{}: expected an object",
                                                kStateFileName, line_no));
    }
    StateRecord r;
    r.requirement.id = string_field(obj, "id", line_no);
    r.requirement.title = string_field(obj, "title", line_no);
    r.requirement.status = string_field(obj, "status", line_no);
    r.requirement.category = string_field(obj, "category", line_no);
    r.requirement.origin = fmt::format("{}:{}", kStateFileName, line_no);
    const auto bad = [&](const std::string& what) {
      return Error(ErrorKind::parse,
                   fmt::format("{}:{}: {}", kStateFileName, line_no, what));
    };
    const auto ts = parse_timestamp(string_field(obj, "last_modified", line_no));
    if (!ts) throw bad("invalid last_modified");
    r.requirement.last_modified = *ts;
    if (obj.contains("scope")) r.requirement.scope = string_field(obj, "scope", line_no);
    r.set_name = string_field(obj, "set", line_no);
    r.constant_name = string_field(obj, "constant", line_no);
    const auto state = parse_lifecycle_state(string_field(obj, "state", line_no));
    if (!state) throw bad("unknown state");
    r.state.state = *state;
    if (obj.contains("deprecated_since")) {
      const auto since =
          parse_timestamp(string_field(obj, "deprecated_since", line_no));
      if (!since) throw bad("invalid deprecated_since");
      r.state.deprecated_since = *since;
    }
    if (const auto it = obj.find("grace_remaining"); it != obj.end()) {
      if (!it->is_number_integer() || it->get<int>() < 0) {
        throw bad("grace_remaining must be a non-negative integer");
      }
      r.state.grace_remaining = it->get<int>();
    }
    if (const auto it = obj.find("unmarked"); it != obj.end()) {
      r.unmarked = it->is_boolean() && it->get<bool>();
    }
    const bool deprecated = r.state.state == LifecycleState::deprecated;
    if (deprecated != r.state.deprecated_since.has_value()) {
      throw bad("deprecated_since must be present exactly for Deprecated");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<Traceable> traceables_from_state(
    std::span<const StateRecord> records) {
  std::vector<Traceable> out;
  for (const auto& r : records) {
    if (r.state.state == LifecycleState::removed) continue;
    out.push_back(make_traceable(r.requirement, r.constant_name, r.set_name,
                                 r.state));
  }
  return out;
}

}  // namespace reqtocode
