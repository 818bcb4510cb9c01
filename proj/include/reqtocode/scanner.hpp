#pragma once

#include <compare>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reqtocode/codegen.hpp"
#include "reqtocode/error.hpp"
#include "reqtocode/source_tree.hpp"

namespace reqtocode {

enum class ReferenceKind { implementation, test };

enum class MarkerForm {
  trace_call,             // trace(SWR_101)
  verify_call,            // verifiesRequirement(SWR_101)
  implementation_marker,  // @TracesSWR(...), TRACES_SWR(...)
  test_marker,            // @VerifiesSWR(...), VERIFIES_SWR(...)
  bare,                   // a constant used outside any marker form
};

std::string_view to_string(ReferenceKind kind) noexcept;
std::string_view to_string(MarkerForm form) noexcept;

struct TraceReference {
  std::string file;
  int line = 0;  // 1-based; for list markers, the marker's own line
  std::string constant_name;
  MarkerForm marker = MarkerForm::bare;
  ReferenceKind kind = ReferenceKind::implementation;

  friend bool operator==(const TraceReference&, const TraceReference&) = default;
};

/// Index order: file, line, constant name, then marker form.
bool reference_less(const TraceReference& a, const TraceReference& b);

struct StringSyntax {
  std::string delimiter;  // opens and closes
  bool multiline = false;
};

/// Lexical conventions plus the marker forms that count as references.
struct MarkerGrammar {
  std::string name;
  std::vector<std::string> line_comments{"//"};
  std::vector<std::pair<std::string, std::string>> block_comments{{"/*", "*/"}};
  std::vector<StringSyntax> strings{{"\"", false}, {"'", false}};
  char escape = '\\';

  std::vector<std::string> trace_calls{"trace"};
  std::vector<std::string> verify_calls{"verifiesRequirement"};
  // A marker is a prefix followed by a non-empty set tag, then '('.
  std::vector<std::string> implementation_marker_prefixes{"@Traces", "TRACES_"};
  std::vector<std::string> test_marker_prefixes{"@Verifies", "VERIFIES_"};
  // Identifiers outside marker forms that match this are bare references.
  // Disengaged: bare mentions are ignored.
  std::optional<std::regex> bare_reference;

  static MarkerGrammar c_like();
  static MarkerGrammar hash_comments();
};

inline constexpr std::string_view kDefaultBareReferencePattern =
    "[A-Z][A-Z0-9]*_[0-9]+(_[A-Z0-9]+)*";

/// Grammar lookup by file extension, falling back to a default.
struct GrammarSet {
  MarkerGrammar fallback = MarkerGrammar::c_like();
  std::map<std::string, MarkerGrammar> by_extension;  // "py" -> grammar

  static GrammarSet defaults();
  const MarkerGrammar& for_path(std::string_view path) const;
};

/// References in file order; matches inside comments and string literals are
/// ignored. `test_path` forces kind=test for every reference in the file.
std::vector<TraceReference> scan_file(std::string_view path,
                                      std::string_view content,
                                      const MarkerGrammar& grammar,
                                      bool test_path = false);

struct ScanConfig {
  std::vector<std::string> include{"**"};
  std::vector<std::string> exclude;
  std::vector<std::string> test_globs{"**/test/**", "**/tests/**", "*_test.*"};
  std::string artifact_root;  // never scanned
  unsigned threads = 0;       // 0: hardware concurrency
  GrammarSet grammars = GrammarSet::defaults();
};

struct ReferenceIndex {
  std::vector<TraceReference> references;  // sorted by reference_less

  /// `file:line:kind:marker:constant_name`, one per line.
  std::string serialize() const;
};

/// Binary files (containing NUL) are skipped. The result does not depend on
/// the thread count.
ReferenceIndex scan_tree(const SourceTree& tree, const ScanConfig& config,
                         Diagnostics* diag = nullptr);

struct ResolvedReference {
  TraceReference reference;
  Traceable traceable;
};

struct ResolutionResult {
  std::vector<ResolvedReference> resolved;
  std::vector<ResolvedReference> deprecated_hits;  // subset of resolved
  std::vector<TraceReference> unresolved;
};

/// Matches each reference by full constant name or by id alias.
ResolutionResult resolve(const ReferenceIndex& index,
                         std::span<const Traceable> traceables);

/// For an unresolved name, the known constant it most likely meant (same
/// `<PREFIX>_<NUMBER>` head), if any.
std::optional<std::string> near_miss(std::string_view unresolved_name,
                                     std::span<const Traceable> traceables);

}  // namespace reqtocode
