#include <doctest.h>
#include <json.hpp>

#include <sstream>

#include "example_history.hpp"
#include "fixture.hpp"
#include "reqtocode/cli.hpp"

using namespace rtc_test;

namespace {

const char* kConfig = R"([source]
files = requirements

[partition]
SensorValidation_SWR = category:SWR

[lifecycle]
grace_cycles = 1
)";

const std::string kRequirementsAt = "2026-01-10T09:00:00Z";

// Warnings sent to stderr that mention `needle`.
int count_mentions(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("sync reports new Traceables, written files, and then nothing") {
    GitFixture repo;
    repo.write("reqtocode.ini", kConfig);
    put_requirement(repo, "SWR-101", "Validate sensor range on input", "Approved",
                    kRequirementsAt);
    put_requirement(repo, "SWR-102", "Reject stale sensor readings", "Approved",
                    kRequirementsAt);
    auto r = repo.cli({"sync"});
    CHECK(r.exit_code == 0);
    CHECK(r.out ==
          "new SWR-101 Active\n"
          "new SWR-102 Active\n"
          "create traceables/SensorValidation_SWR/SensorValidation_SWR.txt\n"
          "create traceables/SensorValidation_SWR/markers.txt\n"
          "create traceables/state.reqtocode\n");
    CHECK(repo.read("traceables/SensorValidation_SWR/SensorValidation_SWR.txt")
              .find("Traceable SWR_102\n") != std::string::npos);
    r = repo.cli({"sync"});
    CHECK(r.exit_code == 0);
    CHECK(r.out == "sync: no changes\n");

    put_requirement(repo, "SWR-102", "Reject stale sensor readings", "Deprecated",
                    "2026-02-02T08:00:00Z");
    r = repo.cli({"sync"});
    CHECK(r.exit_code == 0);
    CHECK(r.out ==
          "state SWR-102 Active -> Deprecated (grace 1)\n"
          "overwrite traceables/SensorValidation_SWR/SensorValidation_SWR.txt\n"
          "overwrite traceables/SensorValidation_SWR/markers.txt\n"
          "overwrite traceables/state.reqtocode\n");
    r = repo.cli({"sync"});
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("state SWR-102 Deprecated (grace 1) -> Removed\n", 0) == 0);
    CHECK(repo.read("traceables/SensorValidation_SWR/SensorValidation_SWR.txt")
              .find("SWR_102") == std::string::npos);

    // Removed is terminal: the source cannot bring it back.
    put_requirement(repo, "SWR-102", "Reject stale sensor readings", "Approved",
                    "2026-03-01T08:00:00Z");
    r = repo.cli({"sync"});
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error: resurrection:") != std::string::npos);
  }

  TEST_CASE("verify walks the deprecation into removal") {
    GitFixture repo;
    build_example_history(repo);
    auto r = repo.cli({"verify"});
    CHECK(r.exit_code == 0);
    CHECK(r.out ==
          "WARNING src/sensor_validation.c:14 SWR_102 requirement SWR-102 is deprecated; "
          "removal in 2 sync cycle(s)\n"
          "WARNING tests/sensor_validation_test.pseudo:12 SWR_102 requirement SWR-102 is "
          "deprecated; removal in 2 sync cycle(s)\n");
    CHECK(repo.cli({"verify", "--deny-deprecated"}).exit_code == 1);

    sync_or_throw(repo);
    sync_or_throw(repo);
    r = repo.cli({"verify"});
    CHECK(r.exit_code == 1);
    CHECK(r.out ==
          "ERROR src/sensor_validation.c:14 SWR_102 requirement SWR-102 has been removed\n"
          "ERROR tests/sensor_validation_test.pseudo:12 SWR_102 requirement SWR-102 has "
          "been removed\n");

    // Older commits still verify against their own generated artifacts.
    CHECK(repo.cli({"--revision", "HEAD", "verify"}).exit_code == 0);
  }

  TEST_CASE("unknown and misspelled names are errors") {
    GitFixture repo;
    build_example_history(repo);
    repo.write("src/typo.c",
               "void f(void) {\n  trace(SWR_101_VALIDATE_RANGE);\n  trace(SWR_999);\n"
               "  int bare = SWR_777;\n}\n");
    const auto r = repo.cli({"verify", "--deny-deprecated"});
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("ERROR src/typo.c:2 SWR_101_VALIDATE_RANGE unknown Traceable; did you "
                     "mean SWR_101_VALIDATE_SENSOR_RANGE_ON_INPUT?\n") != std::string::npos);
    CHECK(r.out.find("ERROR src/typo.c:3 SWR_999 unknown Traceable\n") != std::string::npos);
    CHECK(r.out.find("SWR_777") == std::string::npos);
    CHECK(count_lines_starting(r.out, "ERROR ") == 4);
  }

  TEST_CASE("report reproduces the main table and the branch delta") {
    GitFixture repo;
    build_example_history(repo);
    auto r = repo.cli({"report", "--no-drift"});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("Traceable | Implementation References | Test References | Status\n"
                     "----------|---------------------------|-----------------|-----------\n"
                     "SWR_101   | 2                         | 3               | Active\n"
                     "SWR_102   | 1                         | 1               | Deprecated\n"
                     "SWR_103   | 0                         | 0               | Active\n"
                     "\nLifecycle: 2 Active, 1 Deprecated (1 implementation references to "
                     "Deprecated)\n") != std::string::npos);
    CHECK(r.out.find("SWR_201") == std::string::npos);
    CHECK(repo.cli({"report", "--no-drift", "--all-scopes"}).out.find("SWR_201") !=
          std::string::npos);

    r = repo.cli({"--revision", kFeatureBranch, "report", "--baseline", "--no-drift"});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find(
              "Traceable | Implementation References (delta) | Test References (delta) | "
              "Status\n"
              "----------|-----------------------------------|-------------------------|----"
              "---\n"
              "SWR_201   | 1                                 | 2                       | "
              "Active\n"
              "SWR_202   | 1                                 | 1                       | "
              "Active\n") != std::string::npos);
    r = repo.cli({"--revision", kFeatureBranch, "report", "--baseline", kFeatureBranch,
                  "--no-drift", "--format", "json"});
    CHECK(nlohmann::json::parse(r.out)["rows"].empty());
  }

  TEST_CASE("report options") {
    GitFixture repo;
    build_example_history(repo);
    auto r = repo.cli({"report", "--min-coverage", "90", "--no-drift"});
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("66.7%") != std::string::npos);
    CHECK(repo.cli({"report", "--min-coverage", "60", "--no-drift"}).exit_code == 0);
    CHECK(repo.cli({"report", "--set", "Nope"}).exit_code == 2);
    CHECK(repo.cli({"report", "--format", "xml"}).exit_code == 2);

    const auto target = repo.root() / "out/report.json";
    r = repo.cli({"report", "--format", "json", "--output", target.string()});
    CHECK(r.exit_code == 0);
    CHECK(r.out.empty());
    const auto doc = nlohmann::json::parse(repo.read("out/report.json"));
    CHECK(doc["kind"] == "coverage");
    CHECK(doc["drift"].is_array());
  }

  TEST_CASE("drift lists both directions on the example history") {
    GitFixture repo;
    build_example_history(repo);
    auto r = repo.cli({"drift"});
    CHECK(r.exit_code == 0);
    CHECK(r.out ==
          "DRIFT SWR-101 CodeNewer requirement=2026-01-10T09:00:00Z "
          "code=2026-01-29T16:20:00Z files=src/RangeCheck.java,src/sensor_validation.c,"
          "src/test/java/RangeCheckTest.java,tests/sensor_validation_test.pseudo\n"
          "DRIFT SWR-102 RequirementNewer requirement=2026-02-02T08:00:00Z "
          "code=2026-01-29T16:20:00Z files=src/sensor_validation.c,"
          "tests/sensor_validation_test.pseudo\n");
    CHECK(repo.cli({"drift", "--strict-drift"}).exit_code == 1);
    // Twenty-five days covers both gaps.
    r = repo.cli({"drift", "--strict-drift", "--tolerance", "2160000"});
    CHECK(r.exit_code == 0);
    CHECK(r.out.empty());
  }

  TEST_CASE("operational errors exit 2") {
    GitFixture repo;
    build_example_history(repo);
    auto r = repo.cli({"--revision", "main", "sync"});
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error: usage:") != std::string::npos);
    CHECK(repo.cli({}).exit_code == 2);
    CHECK(repo.cli({"frobnicate"}).exit_code == 2);
    CHECK(repo.cli({"--revision", "no-such-branch", "verify"}).exit_code == 2);
    CHECK(repo.cli({"drift", "--tolerance", "-5"}).exit_code == 2);

    repo.write("reqtocode.ini",
               "[source]\nalm = http://127.0.0.1:1/requirements\n"
               "[partition]\nSensorValidation_SWR = category:SWR\n");
    r = repo.cli({"sync"});
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error: transport:") != std::string::npos);

    repo.write("reqtocode.ini", "[source]\n");
    r = repo.cli({"verify"});
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error: config:") != std::string::npos);

    std::ostringstream out;
    std::ostringstream err;
    CHECK(reqtocode::run_cli({"--config", (repo.root() / "absent.ini").string(), "verify"},
                             out, err) == 2);
    CHECK(reqtocode::run_cli({"--help"}, out, err) == 0);
    CHECK(out.str().find("sync") != std::string::npos);
  }

  TEST_CASE("an unpartitioned requirement fails the sync without writing") {
    GitFixture repo;
    repo.write("reqtocode.ini", kConfig);
    put_requirement(repo, "SWR-101", "Validate", "Approved", kRequirementsAt);
    repo.write("requirements/HWR-1.md",
               requirement_file("HWR-1", "Board", "Approved", kRequirementsAt, "HWR"));
    const auto r = repo.cli({"sync"});
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error: unpartitioned:") != std::string::npos);
    CHECK(count_mentions(r.err, "HWR-1") >= 1);
    CHECK_FALSE(repo.exists("traceables"));
  }
}
