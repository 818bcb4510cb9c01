#include "reqtocode/scanner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "reqtocode/glob.hpp"

namespace reqtocode {
namespace {

enum class TokenType { identifier, number, punct };

struct Token {
  TokenType type;
  std::string_view text;
  int line;
};

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
         c == '$';
}

bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

std::vector<Token> lex(std::string_view src, const MarkerGrammar& g) {
  std::vector<StringSyntax> strings = g.strings;
  std::stable_sort(strings.begin(), strings.end(),
                   [](const StringSyntax& a, const StringSyntax& b) {
                     return a.delimiter.size() > b.delimiter.size();
                   });

  std::vector<Token> tokens;
  int line = 1;
  std::size_t i = 0;
  const std::size_t n = src.size();
  const auto at = [&](std::string_view s) {
    return !s.empty() && src.substr(i, s.size()) == s;
  };

  while (i < n) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
      ++i;
      continue;
    }

    bool skipped = false;
    for (const auto& lc : g.line_comments) {
      if (at(lc)) {
        const auto nl = src.find('\n', i);
        i = nl == std::string_view::npos ? n : nl;
        skipped = true;
        break;
      }
    }
    if (skipped) continue;
    for (const auto& [open, close] : g.block_comments) {
      if (at(open)) {
        auto end = src.find(close, i + open.size());
        end = end == std::string_view::npos ? n : end + close.size();
        line += int(std::count(src.begin() + long(i), src.begin() + long(end), '\n'));
        i = end;
        skipped = true;
        break;
      }
    }
    if (skipped) continue;
    for (const auto& s : strings) {
      if (!at(s.delimiter)) continue;
      i += s.delimiter.size();
      while (i < n) {
        if (src[i] == g.escape && i + 1 < n) {
          if (src[i + 1] == '\n') {
            if (!s.multiline) break;
            ++line;
          }
          i += 2;
          continue;
        }
        if (at(s.delimiter)) {
          i += s.delimiter.size();
          break;
        }
        if (src[i] == '\n') {
          if (!s.multiline) break;  // unterminated: resync at end of line
          ++line;
        }
        ++i;
      }
      skipped = true;
      break;
    }
    if (skipped) continue;

    if (ident_start(c) || (c == '@' && i + 1 < n && ident_start(src[i + 1]))) {
      const std::size_t start = i++;
      while (i < n && ident_char(src[i])) ++i;
      tokens.push_back({TokenType::identifier, src.substr(start, i - start), line});
      continue;
    }
    if (c >= '0' && c <= '9') {
      const std::size_t start = i++;
      while (i < n && (ident_char(src[i]) || src[i] == '.')) ++i;
      tokens.push_back({TokenType::number, src.substr(start, i - start), line});
      continue;
    }
    tokens.push_back({TokenType::punct, src.substr(i, 1), line});
    ++i;
  }
  return tokens;
}

bool is_punct(const Token& t, char c) {
  return t.type == TokenType::punct && t.text.front() == c;
}

bool has_marker_prefix(std::string_view text,
                       const std::vector<std::string>& prefixes) {
  for (const auto& p : prefixes) {
    if (text.size() > p.size() && text.starts_with(p)) return true;
  }
  return false;
}

std::optional<MarkerForm> classify(std::string_view text,
                                   const MarkerGrammar& g) {
  if (std::find(g.trace_calls.begin(), g.trace_calls.end(), text) !=
      g.trace_calls.end()) {
    return MarkerForm::trace_call;
  }
  if (std::find(g.verify_calls.begin(), g.verify_calls.end(), text) !=
      g.verify_calls.end()) {
    return MarkerForm::verify_call;
  }
  if (has_marker_prefix(text, g.test_marker_prefixes)) {
    return MarkerForm::test_marker;
  }
  if (has_marker_prefix(text, g.implementation_marker_prefixes)) {
    return MarkerForm::implementation_marker;
  }
  return std::nullopt;
}

/// Index of the ')' closing the '(' at `open`, or npos.
std::size_t matching_close(const std::vector<Token>& toks, std::size_t open) {
  int depth = 0;
  for (std::size_t j = open; j < toks.size(); ++j) {
    if (toks[j].type != TokenType::punct) continue;
    const char c = toks[j].text.front();
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') {
      if (--depth == 0) return c == ')' ? j : std::string::npos;
    }
  }
  return std::string::npos;
}

std::string extension_of(std::string_view path) {
  const auto slash = path.rfind('/');
  const auto name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  const auto dot = name.rfind('.');
  if (dot == std::string_view::npos || dot == 0) return {};
  return std::string(name.substr(dot + 1));
}

bool under_root(std::string_view path, std::string_view root) {
  if (root.empty()) return false;
  while (root.ends_with('/')) root.remove_suffix(1);
  if (root.empty() || root == ".") return false;
  return path == root ||
         (path.size() > root.size() && path.starts_with(root) &&
          path[root.size()] == '/');
}

}  // namespace

std::string_view to_string(ReferenceKind kind) noexcept {
  return kind == ReferenceKind::test ? "test" : "implementation";
}

std::string_view to_string(MarkerForm form) noexcept {
  switch (form) {
    case MarkerForm::trace_call: return "trace-call";
    case MarkerForm::verify_call: return "verify-call";
    case MarkerForm::implementation_marker: return "implementation-marker";
    case MarkerForm::test_marker: return "test-marker";
    case MarkerForm::bare: return "bare";
  }
  return "?";
}

bool reference_less(const TraceReference& a, const TraceReference& b) {
  return std::tie(a.file, a.line, a.constant_name, a.marker) <
         std::tie(b.file, b.line, b.constant_name, b.marker);
}

MarkerGrammar MarkerGrammar::c_like() {
  MarkerGrammar g;
  g.name = "c-like";
  g.bare_reference = std::regex(std::string(kDefaultBareReferencePattern));
  return g;
}

MarkerGrammar MarkerGrammar::hash_comments() {
  MarkerGrammar g;
  g.name = "hash";
  g.line_comments = {"#"};
  g.block_comments.clear();
  g.strings = {{"\"\"\"", true}, {"'''", true}, {"\"", false}, {"'", false}};
  g.bare_reference = std::regex(std::string(kDefaultBareReferencePattern));
  return g;
}

GrammarSet GrammarSet::defaults() {
  GrammarSet set;
  const MarkerGrammar hash = MarkerGrammar::hash_comments();
  for (const char* ext : {"py", "sh", "bash", "rb", "pl", "yaml", "yml", "toml",
                          "cmake", "r"}) {
    set.by_extension.emplace(ext, hash);
  }
  return set;
}

const MarkerGrammar& GrammarSet::for_path(std::string_view path) const {
  const auto it = by_extension.find(extension_of(path));
  return it == by_extension.end() ? fallback : it->second;
}

std::vector<TraceReference> scan_file(std::string_view path,
                                      std::string_view content,
                                      const MarkerGrammar& grammar,
                                      bool test_path) {
  const std::vector<Token> toks = lex(content, grammar);
  std::vector<TraceReference> refs;
  std::set<std::tuple<int, std::string_view, MarkerForm>> seen;

  const auto add = [&](int line, std::string_view name, MarkerForm form) {
    if (!seen.emplace(line, name, form).second) return;
    const bool test = test_path || form == MarkerForm::verify_call ||
                      form == MarkerForm::test_marker;
    refs.push_back({std::string(path), line, std::string(name), form,
                    test ? ReferenceKind::test : ReferenceKind::implementation});
  };

  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& tok = toks[i];
    if (tok.type != TokenType::identifier) continue;

    if (const auto form = classify(tok.text, grammar);
        form && i + 1 < toks.size() && is_punct(toks[i + 1], '(')) {
      const std::size_t close = matching_close(toks, i + 1);
      if (close != std::string::npos) {
        // Arguments count when they are direct list elements: inside the
        // marker's parentheses or one brace/bracket list within them.
        std::vector<char> open{'('};
        for (std::size_t j = i + 2; j < close; ++j) {
          const Token& t = toks[j];
          if (t.type == TokenType::punct) {
            const char c = t.text.front();
            if (c == '(' || c == '[' || c == '{') open.push_back(c);
            if ((c == ')' || c == ']' || c == '}') && open.size() > 1) open.pop_back();
            continue;
          }
          if (t.type != TokenType::identifier) continue;
          const bool direct =
              open.size() == 1 || (open.size() == 2 && open.back() != '(');
          const Token& prev = toks[j - 1];
          const Token& next = toks[j + 1];
          const bool starts = is_punct(prev, '(') || is_punct(prev, ',') ||
                              is_punct(prev, '{') || is_punct(prev, '[');
          const bool ends = is_punct(next, ',') || is_punct(next, ')') ||
                            is_punct(next, '}') || is_punct(next, ']');
          if (direct && starts && ends) add(tok.line, t.text, *form);
        }
        i = close;
        continue;
      }
    }

    if (grammar.bare_reference && tok.text.front() != '@' &&
        std::regex_match(tok.text.begin(), tok.text.end(),
                         *grammar.bare_reference)) {
      add(tok.line, tok.text, MarkerForm::bare);
    }
  }
  return refs;
}

std::string ReferenceIndex::serialize() const {
  std::string out;
  for (const auto& r : references) {
    out += fmt::format("{}:{}:{}:{}:{}\n", r.file, r.line, to_string(r.kind),
                       to_string(r.marker), r.constant_name);
  }
  return out;
}

ReferenceIndex scan_tree(const SourceTree& tree, const ScanConfig& config,
                         Diagnostics* diag) {
  std::vector<const SourceFile*> files;
  for (const auto& f : tree) {
    if (under_root(f.path, config.artifact_root)) continue;
    if (!match_any_path_glob(config.include, f.path)) continue;
    if (match_any_path_glob(config.exclude, f.path)) continue;
    if (f.content.find('\0') != std::string::npos) continue;
    files.push_back(&f);
  }

  std::vector<std::vector<TraceReference>> per_file(files.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < files.size(); k = next++) {
      const SourceFile& f = *files[k];
      per_file[k] = scan_file(f.path, f.content, config.grammars.for_path(f.path),
                              match_any_path_glob(config.test_globs, f.path));
    }
  };

  unsigned threads = config.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = unsigned(std::min<std::size_t>(threads, std::max<std::size_t>(1, files.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  ReferenceIndex index;
  for (auto& refs : per_file) {
    for (auto& r : refs) index.references.push_back(std::move(r));
  }
  std::sort(index.references.begin(), index.references.end(), reference_less);
  (void)diag;
  return index;
}

ResolutionResult resolve(const ReferenceIndex& index,
                         std::span<const Traceable> traceables) {
  std::unordered_map<std::string, const Traceable*> by_name;
  for (const auto& t : traceables) {
    by_name.emplace(t.constant_name, &t);
    by_name.emplace(t.alias(), &t);
  }
  ResolutionResult result;
  for (const auto& ref : index.references) {
    const auto it = by_name.find(ref.constant_name);
    if (it == by_name.end()) {
      result.unresolved.push_back(ref);
      continue;
    }
    result.resolved.push_back({ref, *it->second});
    if (it->second->state.state == LifecycleState::deprecated) {
      result.deprecated_hits.push_back({ref, *it->second});
    }
  }
  return result;
}

std::optional<std::string> near_miss(std::string_view unresolved_name,
                                     std::span<const Traceable> traceables) {
  static const std::regex head("^([A-Z][A-Z0-9]*_[0-9]+)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(unresolved_name.begin(), unresolved_name.end(), m, head)) {
    return std::nullopt;
  }
  const std::string prefix = m[1].str();
  for (const auto& t : traceables) {
    if (t.alias() == prefix && t.constant_name != unresolved_name) {
      return t.constant_name;
    }
  }
  return std::nullopt;
}

}  // namespace reqtocode
