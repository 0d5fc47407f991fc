#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "iotforge/cli.hpp"
#include "support.hpp"

using namespace iotforge;
using namespace iotforge::testing;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "iotforge");
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Sets an environment variable for the lifetime of the guard.
class EnvGuard {
public:
    EnvGuard(const char* name, const std::string& value) : name_(name) { setenv(name, value.c_str(), 1); }
    ~EnvGuard() { unsetenv(name_); }

private:
    const char* name_;
};

std::string mapping_seed(const fs::path& app) {
    auto j = nlohmann::json::parse(read_file(app / "out/mapping.json"));
    return j.at("seed").dump();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("compile fire detection") {
    TempDir tmp;
    fs::path app = copy_app("fire-bedroom", tmp.path());
    Run r = cli({"compile", app.string()});
    CHECK(r.code == kExitOk);
    CHECK(ProjectLayout::files_in(app / "out/device", ".json").size() == 8);
    for (const char* f : {"resolved.json", "mapping.json", "linkset.json", "contracts/architecture.json",
                          "contracts/vocabulary.json"}) {
        CHECK(fs::exists(app / "out" / f));
    }
}

TEST_CASE("diagnostics exit 1, missing files exit 2") {
    TempDir tmp;
    fs::path app = copy_app("fire-bedroom", tmp.path());
    std::string deploy = read_file(app / "spec/app.deploy");
    auto pos = deploy.find("resources: Alarm;");
    REQUIRE(pos != std::string::npos);
    write_file(app / "spec/app.deploy", deploy.replace(pos, 17, "resources: Sprinkler;"));
    Run bad = cli({"compile", app.string()});
    CHECK(bad.code == kExitDiagnostics);
    CHECK(bad.err.find("spec/app.deploy:") != std::string::npos);
    CHECK(bad.err.find("Sprinkler") != std::string::npos);

    fs::remove(app / "spec/app.vocab");
    CHECK(cli({"compile", app.string()}).code == kExitIo);
    CHECK(cli({"compile", (tmp.path() / "nowhere").string()}).code == kExitIo);
}

TEST_CASE("simulate") {
    TempDir tmp;
    fs::path app = copy_app("fire-bedroom", tmp.path());
    CHECK(cli({"simulate", app.string()}).code == kExitDiagnostics);  // nothing compiled yet
    REQUIRE(cli({"compile", app.string()}).code == kExitOk);

    SUBCASE("fire trace matches the frozen log") {
        CHECK(cli({"simulate", app.string()}).code == kExitOk);
        CHECK(read_file(app / "out/actuation.log") == read_file(source_dir() / "tests/golden/fire-bedroom.log"));
    }
    SUBCASE("horizon 0") {
        CHECK(cli({"simulate", app.string(), "--horizon", "0"}).code == kExitOk);
        CHECK(read_file(app / "out/actuation.log").empty());
    }
    SUBCASE("unknown device in the trace") {
        fs::path trace = tmp.path() / "ghost.jsonl";
        write_file(trace,
                   "{\"t\":0,\"device\":\"Ghost\",\"resource\":\"TemperatureSensor\",\"data\":\"tempMeasurement\","
                   "\"value\":20.0}\n");
        Run r = cli({"simulate", app.string(), "--trace", trace.string()});
        CHECK(r.code == kExitRuntime);
        CHECK(r.err.find("Ghost") != std::string::npos);
    }
    SUBCASE("malformed trace is a diagnostic") {
        fs::path trace = tmp.path() / "bad.jsonl";
        write_file(trace, "{\"t\":\n");
        CHECK(cli({"simulate", app.string(), "--trace", trace.string()}).code == kExitDiagnostics);
    }
    SUBCASE("missing trace file") {
        CHECK(cli({"simulate", app.string(), "--trace", (tmp.path() / "none.jsonl").string()}).code == kExitIo);
    }
    SUBCASE("identical flags, identical logs") {
        REQUIRE(cli({"simulate", app.string(), "--latency", "7"}).code == kExitOk);
        std::string first = read_file(app / "out/actuation.log");
        REQUIRE(cli({"simulate", app.string(), "--latency", "7"}).code == kExitOk);
        CHECK(read_file(app / "out/actuation.log") == first);
        CHECK(first.find("\"t\":300028") != std::string::npos);
    }
}

TEST_CASE("hvac end to end through the CLI") {
    TempDir tmp;
    fs::path app = copy_app("hvac", tmp.path());
    REQUIRE(cli({"compile", app.string()}).code == kExitOk);
    REQUIRE(cli({"simulate", app.string()}).code == kExitOk);
    CHECK(read_file(app / "out/actuation.log") == read_file(source_dir() / "tests/golden/hvac.log"));
}

TEST_CASE("compile is idempotent") {
    TempDir tmp;
    fs::path app = copy_app("road-traffic", tmp.path());
    REQUIRE(cli({"compile", app.string()}).code == kExitOk);
    auto first = snapshot(app / "out");
    REQUIRE(cli({"compile", app.string()}).code == kExitOk);
    CHECK(snapshot(app / "out") == first);
}

TEST_CASE("map with a new seed, then link") {
    TempDir tmp;
    fs::path app = copy_app("fire-bedroom", tmp.path());
    CHECK(cli({"link", app.string()}).code == kExitIo);  // no mapping yet
    REQUIRE(cli({"map", app.string(), "--seed", "9"}).code == kExitOk);
    CHECK(mapping_seed(app) == "9");
    REQUIRE(cli({"link", app.string()}).code == kExitOk);
    auto linked = snapshot(app / "out");
    REQUIRE(cli({"compile", app.string(), "--seed", "9"}).code == kExitOk);
    CHECK(snapshot(app / "out") == linked);

    // a placement outside the instance's room is rejected at link time
    auto j = nlohmann::json::parse(read_file(app / "out/mapping.json"));
    for (auto& a : j.at("assignments")) {
        if (a.at("service") == "FireStateDetector" && a.at("scope") == "Room=1") a["device"] = "Temp3";
    }
    write_file(app / "out/mapping.json", j.dump(2));
    CHECK(cli({"link", app.string()}).code == kExitDiagnostics);
}

TEST_CASE("settings precedence: flag over environment over file") {
    TempDir tmp;
    fs::path app = copy_app("hvac", tmp.path());
    REQUIRE(cli({"compile", app.string()}).code == kExitOk);
    CHECK(mapping_seed(app) == "42");
    {
        EnvGuard env("IOTFORGE_SEED", "5");
        REQUIRE(cli({"compile", app.string()}).code == kExitOk);
        CHECK(mapping_seed(app) == "5");
        REQUIRE(cli({"compile", app.string(), "--seed", "6"}).code == kExitOk);
        CHECK(mapping_seed(app) == "6");
    }
    {
        EnvGuard env("IOTFORGE_HORIZON", "2000");
        REQUIRE(cli({"simulate", app.string()}).code == kExitOk);
        CHECK(read_file(app / "out/actuation.log").find("\"t\":5010") == std::string::npos);
        REQUIRE(cli({"simulate", app.string(), "--horizon", "7000"}).code == kExitOk);
        CHECK(read_file(app / "out/actuation.log").find("\"t\":5010") != std::string::npos);
    }
    {
        EnvGuard env("IOTFORGE_SEED", "many");
        CHECK(cli({"compile", app.string()}).code == kExitIo);
    }
    fs::path elsewhere = tmp.path() / "elsewhere";
    {
        EnvGuard env("IOTFORGE_OUT", elsewhere.string());
        REQUIRE(cli({"compile", app.string()}).code == kExitOk);
        CHECK(fs::exists(elsewhere / "linkset.json"));
    }
}

TEST_CASE("metrics subcommand") {
    TempDir tmp;
    fs::path bed = copy_app("fire-bedroom", tmp.path());
    fs::path kitchen = copy_app("fire-kitchen", tmp.path());
    fs::path reports = tmp.path() / "reports";
    REQUIRE(cli({"metrics", bed.string(), kitchen.string(), "--kind", "reuse", "--out", reports.string()}).code ==
            kExitOk);
    std::string reuse = read_file(reports / "reuse.csv");
    for (const char* c : {"vocabulary", "architecture", "logic", "driver"}) {
        CHECK(reuse.find(std::string("fire-bedroom,fire-kitchen,") + c + ",0,0,0,true") != std::string::npos);
    }
    CHECK(reuse.find("fire-bedroom,fire-kitchen,deployment,0,0,0") == std::string::npos);

    REQUIRE(cli({"metrics", bed.string(), "--kind", "loc"}).code == kExitOk);
    std::string loc = read_file(bed / "out/reports/report.csv");
    CHECK(loc.rfind("concern,app,loc\n", 0) == 0);
    CHECK(loc.find("deployment,fire-bedroom,41\n") != std::string::npos);

    CHECK(cli({"metrics", bed.string(), "--kind", "sizes", "--out", reports.string()}).code == kExitOk);
    CHECK(fs::exists(reports / "package-sizes.csv"));
    CHECK(cli({"metrics", bed.string(), "--kind", "expressiveness", "--out", reports.string()}).code == kExitOk);
    CHECK(read_file(reports / "expressiveness.md").find("| 8 |") != std::string::npos);
    CHECK(cli({"metrics", bed.string(), "--kind", "scaling", "--out", reports.string()}).code == kExitDiagnostics);
    CHECK(cli({"metrics", bed.string(), "--kind", "bogus"}).code == kExitUsage);
}

TEST_CASE("usage errors") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"compile"}).code == kExitUsage);
    CHECK(cli({"compile", "x", "--seed", "minus"}).code == kExitUsage);
    CHECK(cli({"simulate", "x", "--wat"}).code == kExitUsage);
    Run help = cli({"--help"});
    CHECK(help.code == kExitOk);
    CHECK(help.out.find("simulate") != std::string::npos);
}

TEST_CASE("corpus run") {
    TempDir tmp;
    fs::path root = tmp.path() / "corpus";
    for (const auto& app : corpus_apps()) copy_app(app, root);
    Run r = cli({"corpus", root.string()});
    CHECK(r.code == kExitOk);
    for (const char* f : {"report.csv", "summary.csv", "reuse.csv", "scaling.csv", "scaling.svg", "expressiveness.md",
                          "package-sizes.csv"}) {
        CHECK(fs::exists(root / "out/reports" / f));
    }
    CHECK(read_file(root / "out/fire-bedroom/actuation.log") == read_file(source_dir() / "tests/golden/fire-bedroom.log"));
}

}  // TEST_SUITE
