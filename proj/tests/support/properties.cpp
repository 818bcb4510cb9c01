#include "properties.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "fixture.hpp"
#include "reqtocode/coverage.hpp"
#include "reqtocode/drift.hpp"
#include "reqtocode/lifecycle.hpp"
#include "reqtocode/naming.hpp"
#include "reqtocode/requirements.hpp"
#include "reqtocode/scanner.hpp"

namespace rtc_test {

using namespace reqtocode;

namespace {

using Rng = std::mt19937_64;

int pick(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(pick(rng, 0, int(v.size()) - 1))];
}

void record(PropertyOutcome& o, int c, std::uint64_t seed, const std::string& what) {
  if (o.failures++ == 0) {
    o.first_failure = fmt::format("case {} (seed {:#x}): {}", c, seed, what);
  }
}

const Timestamp kBase{std::chrono::sys_days{std::chrono::year{2026} / 1 / 1}};

Requirement make_requirement(int n, const std::string& status = "Approved",
                             const std::string& category = "SWR") {
  Requirement r;
  r.id = fmt::format("R-{}", n);
  r.title = fmt::format("Title {}", n);
  r.status = status;
  r.category = category;
  r.last_modified = kBase;
  return r;
}

// Distinct requirement numbers in [1, 999].
std::vector<int> distinct_numbers(Rng& rng, int count) {
  std::set<int> s;
  while (int(s.size()) < count) s.insert(pick(rng, 1, 999));
  return {s.begin(), s.end()};
}

TraceableState state_of(int kind, Timestamp since, int grace) {
  if (kind == 1) return {LifecycleState::deprecated, since, grace};
  if (kind == 2) return {LifecycleState::removed, std::nullopt, std::nullopt};
  return {};
}

}  // namespace

PropertyOutcome check_reference_conservation(std::uint64_t seed, int cases) {
  PropertyOutcome o;
  const std::vector<std::string> sets{"Alpha_A", "Beta_B"};
  for (int c = 0; c < cases; ++c, ++o.cases) {
    Rng rng(seed + std::uint64_t(c));
    std::vector<Traceable> all;
    for (int n : distinct_numbers(rng, pick(rng, 1, 8))) {
      const Requirement req = make_requirement(n);
      all.push_back(make_traceable(req, normalize_name(req.id, req.title),
                                   pick(rng, sets),
                                   state_of(pick(rng, 0, 2), kBase, 1)));
    }
    std::vector<Traceable> live;
    std::vector<std::string> names{"ZZ_9", "NOT_A_REF"};
    std::map<std::string, const Traceable*> model;  // name -> live traceable
    for (const auto& t : all) {
      names.push_back(t.constant_name);
      names.push_back(t.alias());
      if (t.state.state != LifecycleState::removed) live.push_back(t);
    }
    for (const auto& t : live) {
      model[t.constant_name] = &t;
      model[t.alias()] = &t;
    }

    ReferenceIndex index;
    for (int k = pick(rng, 0, 30); k > 0; --k) {
      index.references.push_back(
          {fmt::format("f{}.c", pick(rng, 0, 3)), pick(rng, 1, 50), pick(rng, names),
           MarkerForm::trace_call,
           pick(rng, 0, 1) ? ReferenceKind::test : ReferenceKind::implementation});
    }
    std::sort(index.references.begin(), index.references.end(), reference_less);
    const std::optional<std::string> filter =
        pick(rng, 0, 1) ? std::optional<std::string>(pick(rng, sets)) : std::nullopt;

    const auto report = compute_coverage(live, resolve(index, live),
                                         {"rev", "id"}, filter);

    std::map<std::string, std::pair<int, int>> expected;  // id -> impl, test
    for (const auto& t : live) {
      if (!filter || t.set_name == *filter) expected[t.requirement_id];
    }
    int expected_sum = 0;
    for (const auto& r : index.references) {
      const auto it = model.find(r.constant_name);
      if (it == model.end() || !expected.contains(it->second->requirement_id)) continue;
      auto& e = expected[it->second->requirement_id];
      (r.kind == ReferenceKind::implementation ? e.first : e.second)++;
      ++expected_sum;
    }

    int sum = 0;
    std::map<std::string, std::pair<int, int>> got;
    for (const auto& row : report.rows) {
      sum += row.impl_count + row.test_count;
      if (row.impl_count < 0 || row.test_count < 0) {
        record(o, c, seed, "negative count");
      }
      if (!got.emplace(row.requirement_id, std::pair{row.impl_count, row.test_count})
               .second) {
        record(o, c, seed, "duplicate row " + row.requirement_id);
      }
    }
    if (sum != expected_sum) {
      record(o, c, seed, fmt::format("sum {} != resolved {}", sum, expected_sum));
    } else if (got != expected) {
      record(o, c, seed, "per-row counts or row set differ from model");
    }
  }
  return o;
}

namespace {

bool model_match(const std::string& p, const std::string& s) {
  if (p == "*") return true;
  if (p.back() == '*') return s.rfind(p.substr(0, p.size() - 1), 0) == 0;
  if (p.size() != s.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] != '?' && p[i] != s[i]) return false;
  }
  return true;
}

}  // namespace

PropertyOutcome check_partition_totality(std::uint64_t seed, int cases) {
  PropertyOutcome o;
  const std::vector<std::string> categories{"SWR", "SYS", "HW", "DOC"};
  const std::vector<std::string> patterns{"SWR", "SYS", "S*", "H?", "*", "D??", "X*"};
  const std::vector<std::string> sets{"Alpha_A", "Beta_B", "Gamma_C"};
  for (int c = 0; c < cases; ++c, ++o.cases) {
    Rng rng(seed + std::uint64_t(c));
    std::vector<PartitionRule> rules;
    for (int k = pick(rng, 1, 4); k > 0; --k) {
      rules.push_back({pick(rng, sets), pick(rng, patterns), "*"});
    }
    std::vector<Requirement> reqs;
    for (int n : distinct_numbers(rng, pick(rng, 1, 6))) {
      reqs.push_back(make_requirement(n, "Approved", pick(rng, categories)));
    }

    std::map<std::string, std::set<std::string>> targets;
    bool any_none = false;
    bool any_many = false;
    for (const auto& r : reqs) {
      auto& t = targets[r.id];
      for (const auto& rule : rules) {
        if (model_match(rule.category_pattern, r.category)) t.insert(rule.set_name);
      }
      any_none = any_none || t.empty();
      any_many = any_many || t.size() > 1;
    }

    try {
      const auto parts = partition(reqs, "src", rules);
      if (any_none || any_many) {
        record(o, c, seed, "partition succeeded where the model expects an error");
        continue;
      }
      std::map<std::string, std::string> placed;
      for (const auto& p : parts) {
        for (const auto& r : p.requirements) {
          if (!placed.emplace(r.id, p.set_name).second) {
            record(o, c, seed, r.id + " placed twice");
          }
        }
      }
      for (const auto& r : reqs) {
        const auto it = placed.find(r.id);
        if (it == placed.end()) {
          record(o, c, seed, r.id + " not placed");
        } else if (it->second != *targets[r.id].begin()) {
          record(o, c, seed, r.id + " placed in the wrong set");
        }
      }
    } catch (const Error& e) {
      const ErrorKind want = any_none ? ErrorKind::unpartitioned
                                      : ErrorKind::ambiguous_partition;
      if (!(any_none || any_many) || e.kind() != want) {
        record(o, c, seed, fmt::format("unexpected error: {}", e.what()));
      }
    }
  }
  return o;
}

namespace {

// Reference state machine for one requirement, written from the rules
// rather than from the implementation.
struct ModelState {
  LifecycleState state = LifecycleState::active;
  int remaining = 0;
};

enum class Event { draft, approved, deprecated, removed, absent };

}  // namespace

PropertyOutcome check_lifecycle_monotonicity(std::uint64_t seed, int cases) {
  PropertyOutcome o;
  const std::vector<Event> events{Event::draft, Event::approved, Event::deprecated,
                                  Event::removed, Event::absent};
  const std::map<Event, std::string> status{{Event::draft, "Draft"},
                                            {Event::approved, "Approved"},
                                            {Event::deprecated, "Deprecated"},
                                            {Event::removed, "Removed"}};
  for (int c = 0; c < cases; ++c, ++o.cases) {
    Rng rng(seed + std::uint64_t(c));
    LifecycleConfig cfg;
    cfg.grace_cycles = c % 4;  // 0..3, evenly
    const int g = cfg.grace_cycles;

    std::optional<TraceableState> prev;
    ModelState model;
    int deprecated_run = 0;  // consecutive present-deprecated cycles
    std::string trail;
    for (int step = 0, len = pick(rng, 1, 12); step < len; ++step) {
      Event ev = pick(rng, events);
      if (!prev && ev == Event::absent) ev = Event::approved;
      // Skew towards deprecation so grace expiry is exercised often.
      if (pick(rng, 0, 2) == 0 && ev != Event::absent) ev = Event::deprecated;
      trail += fmt::format("{}{}", trail.empty() ? "" : ",",
                           ev == Event::absent ? "absent" : status.at(ev));
      const Timestamp at = kBase + std::chrono::days(step);

      // Model step.
      bool expect_throw = false;
      ModelState next = model;
      if (!prev) {
        next = {};
      }
      if (ev == Event::absent) {
        if (model.state == LifecycleState::deprecated) {
          next = model.remaining <= 0 ? ModelState{LifecycleState::removed, 0}
                                      : ModelState{LifecycleState::deprecated,
                                                   model.remaining - 1};
        } else if (model.state == LifecycleState::active) {
          next = g == 0 ? ModelState{LifecycleState::removed, 0}
                        : ModelState{LifecycleState::deprecated, g};
        }
        deprecated_run = 0;
      } else if (prev && model.state == LifecycleState::removed) {
        expect_throw = ev != Event::removed;
      } else if (ev == Event::removed) {
        next = {LifecycleState::removed, 0};
      } else if (ev == Event::deprecated) {
        if (prev && model.state == LifecycleState::deprecated) {
          next = model.remaining - 1 <= 0
                     ? ModelState{LifecycleState::removed, 0}
                     : ModelState{LifecycleState::deprecated, model.remaining - 1};
        } else {
          next = g == 0 ? ModelState{LifecycleState::removed, 0}
                        : ModelState{LifecycleState::deprecated, g};
        }
      } else {
        next = {};
      }
      if (ev == Event::deprecated &&
          (!prev || model.state != LifecycleState::removed)) {
        ++deprecated_run;
      } else if (ev != Event::absent) {
        deprecated_run = 0;
      }

      // Implementation step.
      TraceableState got;
      try {
        got = ev == Event::absent
                  ? absent_requirement_state(prev, cfg, at)
                  : derive_state(status.at(ev), prev, cfg, at);
      } catch (const Error& e) {
        if (!expect_throw || e.kind() != ErrorKind::resurrection) {
          record(o, c, seed, fmt::format("g={} [{}]: unexpected {}", g, trail, e.what()));
        }
        break;  // a resurrection attempt ends the history
      }
      if (expect_throw) {
        record(o, c, seed, fmt::format("g={} [{}]: resurrection accepted", g, trail));
        break;
      }

      if (got.state != next.state ||
          (next.state == LifecycleState::deprecated &&
           got.grace_remaining != std::optional<int>(next.remaining))) {
        record(o, c, seed, fmt::format("g={} [{}]: state differs from model", g, trail));
        break;
      }
      if (prev && prev->state == LifecycleState::removed &&
          got.state != LifecycleState::removed) {
        record(o, c, seed, fmt::format("g={} [{}]: left Removed", g, trail));
      }
      if (prev && prev->state == LifecycleState::deprecated &&
          got.state == LifecycleState::deprecated) {
        if (*got.grace_remaining >= *prev->grace_remaining) {
          record(o, c, seed, fmt::format("g={} [{}]: grace did not shrink", g, trail));
        }
        if (got.deprecated_since != prev->deprecated_since) {
          record(o, c, seed, fmt::format("g={} [{}]: deprecated_since moved", g, trail));
        }
      }
      if (deprecated_run == g + 1 && got.state != LifecycleState::removed &&
          ev == Event::deprecated) {
        record(o, c, seed,
               fmt::format("g={} [{}]: still present after g+1 deprecated cycles", g,
                           trail));
      }
      const bool deprecated = got.state == LifecycleState::deprecated;
      if (deprecated != got.deprecated_since.has_value() ||
          deprecated != got.grace_remaining.has_value()) {
        record(o, c, seed, fmt::format("g={} [{}]: deprecation fields inconsistent", g, trail));
      }
      prev = got;
      model = next;
    }
  }
  return o;
}

PropertyOutcome check_whole_identifier_scan(std::uint64_t seed, int cases) {
  PropertyOutcome o;
  const std::string upper = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  const std::string ident = upper + "abcdefghijklmnopqrstuvwxyz0123456789_";
  const MarkerGrammar grammar = MarkerGrammar::c_like();
  for (int c = 0; c < cases; ++c, ++o.cases) {
    Rng rng(seed + std::uint64_t(c));
    std::string name(1, upper[std::size_t(pick(rng, 0, 25))]);
    for (int k = pick(rng, 0, 3); k > 0; --k) name += upper[std::size_t(pick(rng, 0, 25))];
    name += fmt::format("_{}", pick(rng, 1, 999));
    if (pick(rng, 0, 1)) name += "_" + std::string(1, upper[std::size_t(pick(rng, 0, 25))]);

    // Each line is a real site for `name` or a decoy.
    std::string content;
    std::set<int> exact_lines;
    std::set<int> quiet_lines;  // must produce no reference at all
    const int lines = pick(rng, 1, 12);
    for (int line = 1; line <= lines; ++line) {
      const char extra = ident[std::size_t(pick(rng, 0, int(ident.size()) - 1))];
      switch (pick(rng, 0, 6)) {
        case 0:
          content += fmt::format("  trace({});\n", name);
          exact_lines.insert(line);
          break;
        case 1:
          content += fmt::format("  trace({}{});\n", name, extra);
          break;
        case 2:
          content += fmt::format("  trace({}{});\n", extra, name);
          break;
        case 3:
          content += fmt::format("  // trace({}) {}\n", name, name);
          quiet_lines.insert(line);
          break;
        case 4:
          content += fmt::format("  log(\"trace({}) {}\");\n", name, name);
          quiet_lines.insert(line);
          break;
        case 5:
          content += fmt::format("  /* {} */ x = {}{};\n", name, name, extra);
          break;
        default:
          content += fmt::format("  y = {};\n", name);
          exact_lines.insert(line);
          break;
      }
    }

    std::set<int> matched;
    for (const auto& r : scan_file("f.c", content, grammar)) {
      if (quiet_lines.contains(r.line)) {
        record(o, c, seed, fmt::format("reference inside comment/string: {}", content));
      }
      if (r.constant_name == name) matched.insert(r.line);
    }
    if (matched != exact_lines) {
      record(o, c, seed, fmt::format("'{}' matched lines differ in:\n{}", name, content));
    }
  }
  return o;
}

PropertyOutcome check_delta_subset(std::uint64_t seed, int cases) {
  PropertyOutcome o;
  for (int c = 0; c < cases; ++c, ++o.cases) {
    Rng rng(seed + std::uint64_t(c));
    std::vector<Traceable> live;
    std::vector<std::string> names{"ZZ_1"};
    for (int n : distinct_numbers(rng, pick(rng, 1, 5))) {
      const Requirement req = make_requirement(n);
      live.push_back(make_traceable(req, normalize_name(req.id, req.title), "Alpha_A",
                                    state_of(pick(rng, 0, 1), kBase, 2)));
      names.push_back(live.back().constant_name);
      names.push_back(live.back().alias());
    }
    std::vector<TraceReference> pool;
    for (int k = pick(rng, 1, 25); k > 0; --k) {
      pool.push_back({fmt::format("f{}.c", pick(rng, 0, 3)), pick(rng, 1, 40),
                      pick(rng, names), MarkerForm::trace_call,
                      pick(rng, 0, 1) ? ReferenceKind::test : ReferenceKind::implementation});
    }
    ReferenceIndex branch;
    ReferenceIndex base;
    for (const auto& r : pool) {
      const int where = pick(rng, 0, 2);  // branch only, base only, both
      if (where != 1) branch.references.push_back(r);
      if (where != 0) {
        TraceReference moved = r;
        if (pick(rng, 0, 1)) moved.line += pick(rng, 1, 5);  // line churn
        base.references.push_back(moved);
      }
    }
    std::sort(branch.references.begin(), branch.references.end(), reference_less);
    std::sort(base.references.begin(), base.references.end(), reference_less);

    const auto delta = compute_delta(branch, base, live, {"b", "1"}, {"main", "2"});
    const auto absolute = compute_coverage(live, resolve(branch, live), {"b", "1"},
                                           std::nullopt);

    std::set<std::tuple<std::string, std::string, ReferenceKind>> known;
    for (const auto& r : base.references) known.emplace(r.file, r.constant_name, r.kind);
    std::map<std::string, std::pair<int, int>> model;
    for (const auto& r : branch.references) {
      if (known.contains({r.file, r.constant_name, r.kind})) continue;
      for (const auto& t : live) {
        if (t.constant_name == r.constant_name || t.alias() == r.constant_name) {
          auto& m = model[t.requirement_id];
          (r.kind == ReferenceKind::implementation ? m.first : m.second)++;
        }
      }
    }
    std::map<std::string, std::pair<int, int>> got;
    for (const auto& row : delta.rows) {
      got[row.requirement_id] = {row.impl_count, row.test_count};
      if (row.impl_count == 0 && row.test_count == 0) {
        record(o, c, seed, "all-zero delta row");
      }
      const auto abs = std::find_if(
          absolute.rows.begin(), absolute.rows.end(),
          [&](const CoverageRow& a) { return a.requirement_id == row.requirement_id; });
      if (abs == absolute.rows.end() || row.impl_count > abs->impl_count ||
          row.test_count > abs->test_count) {
        record(o, c, seed, "delta exceeds absolute for " + row.requirement_id);
      }
    }
    if (got != model) record(o, c, seed, "delta differs from the triple model");
  }
  return o;
}

PropertyOutcome check_drift_properties(std::uint64_t seed, int cases) {
  PropertyOutcome o;
  for (int c = 0; c < cases; ++c, ++o.cases) {
    Rng rng(seed + std::uint64_t(c));
    FakeVcs vcs;
    vcs.add_revision("r", {});
    const auto rand_time = [&] {
      // Coarse days plus jitter so ties and near-ties both occur.
      return kBase + std::chrono::days(pick(rng, 0, 20)) +
             std::chrono::seconds(pick(rng, 0, 2) * pick(rng, 0, 7200));
    };
    std::vector<Traceable> live;
    ResolutionResult res;
    std::map<std::string, std::pair<Timestamp, Timestamp>> model_times;  // req, code
    for (int n : distinct_numbers(rng, pick(rng, 1, 5))) {
      Requirement req = make_requirement(n);
      req.last_modified = rand_time();
      live.push_back(make_traceable(req, normalize_name(req.id, req.title), "Alpha_A", {}));
      if (pick(rng, 0, 4) == 0) continue;  // unreferenced
      Timestamp code{};
      for (int f = pick(rng, 1, 3); f > 0; --f) {
        const std::string file = fmt::format("{}_{}.c", n, f);
        const Timestamp t = rand_time();
        vcs.set_commit_time("r", file, t);
        code = std::max(code, t);
        res.resolved.push_back({{file, 1, live.back().alias(), MarkerForm::trace_call,
                                 ReferenceKind::implementation},
                                live.back()});
      }
      model_times[req.id] = {req.last_modified, code};
    }
    const auto t1 = std::chrono::seconds(pick(rng, 0, 3) * pick(rng, 0, 86400));
    const auto t2 = t1 + std::chrono::seconds(pick(rng, 0, 2) * pick(rng, 0, 86400));

    const auto f1 = detect_drift(live, res, {"r", "1"}, vcs, t1);
    const auto f2 = detect_drift(live, res, {"r", "1"}, vcs, t2);

    std::map<std::string, DriftDirection> model;
    for (const auto& [id, times] : model_times) {
      const auto [req, code] = times;
      if (req > code + t1) model[id] = DriftDirection::requirement_newer;
      if (code > req + t1) model[id] = DriftDirection::code_newer;
    }
    std::map<std::string, DriftDirection> got1;
    for (const auto& f : f1) {
      if (!got1.emplace(f.requirement_id, f.direction).second) {
        record(o, c, seed, "two findings for " + f.requirement_id);
      }
      if (f.evidence_files.empty()) record(o, c, seed, "finding without evidence");
    }
    if (got1 != model) record(o, c, seed, "findings differ from the model");
    for (const auto& f : f2) {
      const auto it = got1.find(f.requirement_id);
      if (it == got1.end() || it->second != f.direction) {
        record(o, c, seed, "wider tolerance added " + f.requirement_id);
      }
    }
  }
  return o;
}

}  // namespace rtc_test
