#include "reqtocode/requirements.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "reqtocode/digest.hpp"
#include "reqtocode/glob.hpp"

namespace reqtocode {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
           c == '\v';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\''))) {
    v = v.substr(1, v.size() - 2);
  }
  return std::string(v);
}

void validate_fields(Requirement& req, const FormatConfig& format) {
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::validation, fmt::format("{}: {}", req.origin, what));
  };
  req.id = std::string(trim(req.id));
  if (req.id.empty()) fail("requirement id is empty");
  for (char c : req.id) {
    if (c == '"' || c == '\\' || c == ' ' || c == '\t' || c == '\n') {
      fail(fmt::format("requirement id '{}' contains whitespace, quote or "
                       "backslash",
                       req.id));
    }
  }
  req.title = collapse_whitespace(req.title);
  if (req.title.empty()) fail(fmt::format("{}: title is empty", req.id));
  req.category = std::string(trim(req.category));
  if (req.category.empty()) fail(fmt::format("{}: category is empty", req.id));
  if (std::find(format.status_vocabulary.begin(),
                format.status_vocabulary.end(),
                req.status) == format.status_vocabulary.end()) {
    std::string allowed;
    for (const auto& s : format.status_vocabulary) {
      if (!allowed.empty()) allowed += ", ";
      allowed += s;
    }
    fail(fmt::format("{}: unknown status token '{}' (allowed: {})", req.id,
                     req.status, allowed));
  }
  if (req.scope && trim(*req.scope).empty()) req.scope.reset();
}

SourceSnapshot finalize(std::vector<Requirement> reqs, std::string source_id,
                        Diagnostics* diag) {
  std::sort(reqs.begin(), reqs.end(),
            [](const Requirement& a, const Requirement& b) {
              return a.id < b.id;
            });
  for (std::size_t i = 1; i < reqs.size(); ++i) {
    if (reqs[i].id == reqs[i - 1].id) {
      throw Error(ErrorKind::validation,
                  fmt::format("duplicate requirement id '{}' defined at {} and {}",
                              reqs[i].id, reqs[i - 1].origin, reqs[i].origin));
    }
  }
  SourceSnapshot snap;
  snap.taken_at = now_utc();
  for (const auto& r : reqs) {
    if (r.last_modified > snap.taken_at) {
      warn(diag, fmt::format("{}: last_modified {} lies in the future "
                             "(clock skew?)",
                             r.id, format_timestamp(r.last_modified)));
    }
  }
  snap.requirements = std::move(reqs);
  snap.source_id = std::move(source_id);
  return snap;
}

bool has_extension(const std::filesystem::path& p,
                   const std::vector<std::string>& exts) {
  const auto ext = p.extension().string();
  return std::find(exts.begin(), exts.end(), ext) != exts.end();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const json& require_member(const json& obj, const char* key,
                           const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorKind::schema,
                fmt::format("{}.{}: required field missing", path, key));
  }
  return *it;
}

std::string require_string(const json& obj, const char* key,
                           const std::string& path) {
  const json& v = require_member(obj, key, path);
  if (!v.is_string()) {
    throw Error(ErrorKind::schema, fmt::format("{}.{}: expected string, got {}",
                                               path, key, v.type_name()));
  }
  return v.get<std::string>();
}

}  // namespace

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
        c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

Requirement parse_requirement_file(std::string_view content,
                                   std::string_view file_name) {
  if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);

  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    const auto nl = content.find('\n', start);
    const auto end = nl == std::string_view::npos ? content.size() : nl;
    std::string_view line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }

  const auto parse_error = [&](std::size_t line_no, const std::string& what) {
    return Error(ErrorKind::parse,
                 fmt::format("{}:{}: {}", file_name, line_no, what));
  };

  if (lines.empty() || trim(lines[0]) != "---") {
    throw parse_error(1, "expected front-matter opening '---'");
  }

  Requirement req;
  std::map<std::string, std::size_t> seen;
  std::optional<std::size_t> closing;
  std::string timestamp_text;
  std::size_t timestamp_line = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    const std::size_t line_no = i + 1;
    if (line == "---") {
      closing = line_no;
      break;
    }
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw parse_error(line_no, "expected 'key: value'");
    }
    const std::string key(trim(line.substr(0, colon)));
    const std::string value = unquote(trim(line.substr(colon + 1)));
    if (key.empty()) throw parse_error(line_no, "empty key");
    if (!seen.emplace(key, line_no).second) {
      throw parse_error(line_no, fmt::format("duplicate key '{}'", key));
    }
    if (key == "id") {
      req.id = value;
      req.origin = fmt::format("{}:{}", file_name, line_no);
    } else if (key == "title") {
      req.title = value;
    } else if (key == "status") {
      req.status = value;
    } else if (key == "last_modified") {
      timestamp_text = value;
      timestamp_line = line_no;
    } else if (key == "category") {
      req.category = value;
    } else if (key == "scope") {
      req.scope = value;
    } else {
      req.extra.emplace_back(key, value);
    }
  }
  if (!closing) {
    throw parse_error(lines.size(), "front matter is not closed with '---'");
  }
  for (const char* key : {"id", "title", "status", "last_modified", "category"}) {
    if (!seen.contains(key)) {
      throw parse_error(*closing, fmt::format("missing required key '{}'", key));
    }
  }
  const auto ts = parse_timestamp(timestamp_text);
  if (!ts) {
    throw parse_error(timestamp_line,
                      fmt::format("invalid RFC 3339 timestamp '{}'",
                                  timestamp_text));
  }
  req.last_modified = *ts;
  return req;
}

SourceSnapshot load_from_files(const std::filesystem::path& root,
                               const FormatConfig& format, Diagnostics* diag) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorKind::io,
                "requirement directory does not exist: " + root.string());
  }
  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(root, ec);
       it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) break;
    const auto name = it->path().filename().string();
    if (!name.empty() && name.front() == '.') {
      if (it->is_directory()) it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file() && has_extension(it->path(), format.extensions)) {
      files.push_back(it->path());
    }
  }
  if (ec) throw Error(ErrorKind::io, "cannot list " + root.string());
  std::sort(files.begin(), files.end());

  std::vector<Requirement> reqs;
  reqs.reserve(files.size());
  for (const auto& f : files) {
    const auto shown = fs::relative(f, root).generic_string();
    Requirement req = parse_requirement_file(read_file(f), shown);
    validate_fields(req, format);
    reqs.push_back(std::move(req));
  }
  return finalize(std::move(reqs), fs::absolute(root).lexically_normal().string(),
                  diag);
}

SourceSnapshot parse_alm_payload(std::string_view text, std::string source_id,
                                 const FormatConfig& format,
                                 Diagnostics* diag) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::schema, fmt::format("$: not valid JSON ({})", e.what()));
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::schema, "$: expected object");
  }
  const json& list = require_member(doc, "requirements", "$");
  if (!list.is_array()) {
    throw Error(ErrorKind::schema, "$.requirements: expected array");
  }
  std::vector<Requirement> reqs;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = fmt::format("$.requirements[{}]", i);
    const json& item = list[i];
    if (!item.is_object()) {
      throw Error(ErrorKind::schema, path + ": expected object");
    }
    Requirement req;
    req.id = require_string(item, "id", path);
    req.title = require_string(item, "title", path);
    req.status = require_string(item, "status", path);
    req.category = require_string(item, "category", path);
    const std::string ts_text = require_string(item, "last_modified", path);
    const auto ts = parse_timestamp(ts_text);
    if (!ts) {
      throw Error(ErrorKind::schema,
                  fmt::format("{}.last_modified: invalid RFC 3339 timestamp '{}'",
                              path, ts_text));
    }
    req.last_modified = *ts;
    if (const auto it = item.find("scope"); it != item.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw Error(ErrorKind::schema,
                    fmt::format("{}.scope: expected string or null", path));
      }
      req.scope = it->get<std::string>();
    }
    for (const auto& [key, value] : item.items()) {
      static const std::set<std::string> known{"id", "title", "status",
                                               "last_modified", "category",
                                               "scope"};
      if (!known.contains(key)) req.extra.emplace_back(key, value.dump());
    }
    req.origin = source_id + path;
    validate_fields(req, format);
    reqs.push_back(std::move(req));
  }
  return finalize(std::move(reqs), std::move(source_id), diag);
}

SourceSnapshot load_from_mock_alm(std::string_view endpoint,
                                  const std::optional<std::string>& auth_token,
                                  const FormatConfig& format,
                                  Diagnostics* diag) {
  if (endpoint.starts_with("https://")) {
    throw Error(ErrorKind::transport,
                "https endpoints are not supported by the mock-ALM client");
  }
  if (!endpoint.starts_with("http://")) {
    std::ifstream in{std::filesystem::path(endpoint), std::ios::binary};
    if (!in) {
      throw Error(ErrorKind::transport,
                  fmt::format("cannot read mock-ALM payload {}", endpoint));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_alm_payload(ss.str(), std::string(endpoint), format, diag);
  }

  const auto path_start = endpoint.find('/', std::string_view("http://").size());
  const std::string base(endpoint.substr(0, path_start));
  const std::string path = path_start == std::string_view::npos
                               ? "/"
                               : std::string(endpoint.substr(path_start));
  httplib::Client client(base);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(30, 0);
  httplib::Headers headers;
  if (auth_token && !auth_token->empty()) {
    headers.emplace("Authorization", "Bearer " + *auth_token);
  }
  const auto res = client.Get(path, headers);
  if (!res) {
    throw Error(ErrorKind::transport,
                fmt::format("GET {} failed: {}", endpoint,
                            httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw Error(ErrorKind::transport,
                fmt::format("GET {} returned HTTP {}", endpoint, res->status));
  }
  return parse_alm_payload(res->body, std::string(endpoint), format, diag);
}

std::string serialize_snapshot(const SourceSnapshot& snapshot) {
  json list = json::array();
  for (const auto& r : snapshot.requirements) {
    json item{{"id", r.id},
              {"title", r.title},
              {"status", r.status},
              {"last_modified", format_timestamp(r.last_modified)},
              {"category", r.category}};
    item["scope"] = r.scope ? json(*r.scope) : json(nullptr);
    list.push_back(std::move(item));
  }
  return json{{"requirements", std::move(list)}}.dump() + "\n";
}

std::string snapshot_hash(const SourceSnapshot& snapshot) {
  return sha256_hex(serialize_snapshot(snapshot));
}

std::vector<RequirementPartition> partition(
    std::span<const Requirement> requirements, std::string_view source_id,
    std::span<const PartitionRule> rules) {
  std::map<std::string, std::vector<Requirement>> sets;
  std::vector<std::string> unmatched;
  std::vector<std::string> ambiguous;
  for (const auto& req : requirements) {
    std::set<std::string> targets;
    for (const auto& rule : rules) {
      if (match_glob(rule.category_pattern, req.category) &&
          match_glob(rule.source_pattern, source_id)) {
        targets.insert(rule.set_name);
      }
    }
    if (targets.empty()) {
      unmatched.push_back(req.id);
    } else if (targets.size() > 1) {
      std::string names;
      for (const auto& t : targets) names += (names.empty() ? "" : ", ") + t;
      ambiguous.push_back(fmt::format("{} ({})", req.id, names));
    } else {
      sets[*targets.begin()].push_back(req);
    }
  }
  const auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
  };
  if (!unmatched.empty()) {
    throw Error(ErrorKind::unpartitioned,
                "requirements matching no partition rule: " + join(unmatched));
  }
  if (!ambiguous.empty()) {
    throw Error(ErrorKind::ambiguous_partition,
                "requirements matching several partition rules: " +
                    join(ambiguous));
  }
  std::vector<RequirementPartition> out;
  for (auto& [name, reqs] : sets) {
    std::sort(reqs.begin(), reqs.end(),
              [](const Requirement& a, const Requirement& b) {
                return a.id < b.id;
              });
    out.push_back({name, std::move(reqs)});
  }
  return out;
}

std::vector<RequirementPartition> partition(
    const SourceSnapshot& snapshot, std::span<const PartitionRule> rules) {
  return partition(snapshot.requirements, snapshot.source_id, rules);
}

}  // namespace reqtocode
