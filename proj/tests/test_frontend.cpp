#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "iotforge/frontend.hpp"
#include "support.hpp"

using namespace iotforge;
using namespace iotforge::testing;

TEST_SUITE("frontend") {

TEST_CASE("building vocabulary: three regions, six resources") {
    auto v = must(parse_vocabulary(kBuildingVocab, "b.vocab"));
    CHECK(v.name == "Building");
    REQUIRE(v.regions.size() == 3);
    CHECK(v.regions[0].name == "Building");
    CHECK(v.regions[2].name == "Room");
    CHECK(v.sensors.size() == 3);
    CHECK(v.actuators.size() == 2);
    CHECK(v.storages.size() == 1);
    CHECK(v.resource_count() == 6);
    const StorageDecl* db = v.find_storage("ProfileDB");
    REQUIRE(db);
    CHECK(db->data_name == "preference");
    CHECK(db->key_name == "badgeId");
    CHECK(db->key_type == "string");
    CHECK(v.find_actuator("Heater")->actions[0].params[0].type == "double");
}

TEST_CASE("empty vocabulary is valid") {
    auto v = must(parse_vocabulary("vocabulary X\n", "x.vocab"));
    CHECK(v.regions.empty());
    CHECK(v.records.empty());
    CHECK(v.resource_count() == 0);
}

TEST_CASE("duplicate sensor is reported at the second declaration") {
    const char* src =
        "vocabulary V\n"
        "resources:\n"
        "  sensor T { generate a : double; }\n"
        "  sensor T { generate b : double; }\n";
    auto v = parse_vocabulary(src, "dup.vocab");
    REQUIRE_FALSE(v.ok());
    REQUIRE(v.diagnostics().size() == 1);
    const Diagnostic& d = v.diagnostics()[0];
    CHECK(d.span.file == "dup.vocab");
    // line 4, the name T after "  sensor "
    CHECK(d.span.line == 4);
    CHECK(d.span.column == 10);
    CHECK(d.message.find("duplicate") != std::string::npos);
}

TEST_CASE("fire architecture has three services") {
    auto a = must(parse_architecture(read_file(app_dir("fire-bedroom") / "spec/app.arch"), "app.arch"));
    REQUIRE(a.services.size() == 3);
    const ServiceDecl& avg = a.services[0];
    CHECK(avg.name == "AverageTempCalculator");
    CHECK(avg.scope == "Room");
    REQUIRE(avg.consumes.size() == 1);
    CHECK(avg.consumes[0].window == 4u);
    CHECK(avg.consumes[0].period_ms == 60000);
    CHECK(a.services[1].consumes.size() == 2);
    CHECK(a.services[2].scope == "Building");
    REQUIRE(a.services[2].commands.size() == 1);
    CHECK(a.services[2].commands[0].action_name == "activate");
    CHECK(a.services[2].commands[0].actuator_name == "Alarm");
}

TEST_CASE("architecture without services") {
    auto a = must(parse_architecture("architecture A uses V\n", "a.arch"));
    CHECK(a.services.empty());
    CHECK(a.vocabulary_name == "V");
}

TEST_CASE("window 0 is a syntax error at the literal") {
    const char* src =
        "architecture A uses V\n"
        "service S {\n"
        "  scope: Room;\n"
        "  consume x window 0;\n"
        "}\n";
    auto a = parse_architecture(src, "w.arch");
    REQUIRE_FALSE(a.ok());
    const Diagnostic& d = a.diagnostics()[0];
    CHECK(d.span.line == 4);
    CHECK(d.span.column == 20);
}

TEST_CASE("durations in ms, s and min") {
    const char* src =
        "architecture A uses V\n"
        "service S { scope: Room; consume a every 250 ms; consume b every 2 s; consume c every 3 min; logic: builtin passthrough; }\n";
    auto a = must(parse_architecture(src, "d.arch"));
    const auto& c = a.services[0].consumes;
    CHECK(c[0].period_ms == 250);
    CHECK(c[1].period_ms == 2000);
    CHECK(c[2].period_ms == 180000);
}

TEST_CASE("fire deployment has eight devices") {
    auto d = must(parse_deployment(read_file(app_dir("fire-bedroom") / "spec/app.deploy"), "app.deploy"));
    REQUIRE(d.devices.size() == 8);
    CHECK(d.devices[0].coord("Room") == 1);
    CHECK(d.devices[2].coord("Room") == 2);
    CHECK(d.devices[6].hosts("Alarm"));
}

TEST_CASE("single device deployment") {
    auto d = must(parse_deployment(
        "deployment D uses V\ndevice A { region: Room = 3; resources: T; platform: P; }\n", "d.deploy"));
    REQUIRE(d.devices.size() == 1);
    CHECK(d.devices[0].coords.size() == 1);
    CHECK(d.devices[0].platform == "P");
}

TEST_CASE("unknown region in coords is left to the linker") {
    auto d = must(parse_deployment(
        "deployment D uses V\ndevice A { region: Wing = 1; resources: T; platform: P; }\n", "d.deploy"));
    CHECK(d.devices[0].coords[0].region == "Wing");
}

TEST_CASE("format_diagnostics") {
    CHECK(format_diagnostics({}).empty());
    std::vector<Diagnostic> one = {Diagnostic{SourceSpan{"a.vocab", 3, 7, 1}, Severity::Error, "bad"}};
    CHECK(format_diagnostics(one) == "a.vocab:3:7: error: bad\n");
    std::vector<Diagnostic> three = {
        Diagnostic{SourceSpan{"a.arch", 1, 1, 1}, Severity::Error, "first"},
        Diagnostic{SourceSpan{"a.arch", 2, 5, 1}, Severity::Warning, "second"},
        Diagnostic{SourceSpan{"a.arch", 9, 2, 1}, Severity::Error, "third"},
    };
    CHECK(format_diagnostics(three) ==
          "a.arch:1:1: error: first\n"
          "a.arch:2:5: warning: second\n"
          "a.arch:9:2: error: third\n");
    std::vector<Diagnostic> unplaced = {Diagnostic{SourceSpan{"x.deploy", 0, 0, 0}, Severity::Error, "m"}};
    CHECK(format_diagnostics(unplaced) == "x.deploy: error: m\n");
}

TEST_CASE("comments and blank lines do not change the tree") {
    std::string plain = "vocabulary V\nregions:\n  Room;\nresources:\n  sensor T { generate a : double; }\n";
    std::string noisy =
        "// header\n\nvocabulary V\n\n// regions next\nregions:\n  Room; // trailing\n\nresources:\n"
        "  // one sensor\n  sensor T { generate a : double; }\n\n";
    CHECK(same_structure(must(parse_vocabulary(plain, "a")), must(parse_vocabulary(noisy, "b"))));
}

TEST_CASE("round trip over every corpus spec") {
    for (const auto& app : corpus_apps()) {
        CAPTURE(app);
        fs::path spec = app_dir(app) / "spec";
        auto v = must(parse_vocabulary(read_file(spec / "app.vocab"), "v"));
        auto v2 = must(parse_vocabulary(print_vocabulary(v), "v2"));
        CHECK(same_structure(v, v2));
        CHECK(print_vocabulary(v2) == print_vocabulary(v));
        auto a = must(parse_architecture(read_file(spec / "app.arch"), "a"));
        auto a2 = must(parse_architecture(print_architecture(a), "a2"));
        CHECK(same_structure(a, a2));
        auto d = must(parse_deployment(read_file(spec / "app.deploy"), "d"));
        auto d2 = must(parse_deployment(print_deployment(d), "d2"));
        CHECK(same_structure(d, d2));
    }
}

TEST_CASE("parsing is pure") {
    std::string src = read_file(app_dir("road-traffic") / "spec/app.arch");
    auto a = must(parse_architecture(src, "a"));
    auto b = must(parse_architecture(src, "a"));
    CHECK(same_structure(a, b));
    CHECK(a.services[0].span == b.services[0].span);
}

TEST_CASE("mutated specs parse or diagnose") {
    std::vector<std::string> bases;
    for (const auto& app : corpus_apps()) {
        for (const char* f : {"spec/app.vocab", "spec/app.arch", "spec/app.deploy"}) {
            bases.push_back(read_file(app_dir(app) / f));
        }
    }
    std::mt19937_64 rng(7);
    int parsed = 0, diagnosed = 0;
    for (int i = 0; i < 1500; ++i) {
        std::size_t k = static_cast<std::size_t>(i) % bases.size();
        std::string m = mutate(bases[k], rng);
        bool ok = false;
        std::size_t ndiag = 0;
        switch (k % 3) {
            case 0: {
                auto r = parse_vocabulary(m, "m");
                ok = r.ok();
                if (!ok) ndiag = r.diagnostics().size();
                break;
            }
            case 1: {
                auto r = parse_architecture(m, "m");
                ok = r.ok();
                if (!ok) ndiag = r.diagnostics().size();
                break;
            }
            default: {
                auto r = parse_deployment(m, "m");
                ok = r.ok();
                if (!ok) ndiag = r.diagnostics().size();
                break;
            }
        }
        if (ok) ++parsed; else ++diagnosed;
        if (!ok) CHECK(ndiag >= 1);
    }
    CHECK(parsed + diagnosed == 1500);
    CHECK(diagnosed > 0);
}

TEST_CASE("manifests") {
    auto l = must(parse_logic_manifest("// x\nhandler k = threshold(gt=50);\nhandler j = latch;\n", "a.logic"));
    REQUIRE(l.handlers.size() == 2);
    CHECK(l.find("k")->builtin_name == "threshold");
    CHECK(l.find("k")->params[0].value.as_number() == 50.0);
    CHECK(l.find("j")->params.empty());
    auto d = must(parse_driver_manifest("driver A = trace;\ndriver B = extern feed;\n", "a.drivers"));
    REQUIRE(d.drivers.size() == 2);
    CHECK_FALSE(d.find("A")->is_extern);
    CHECK(d.find("B")->extern_key == "feed");
    CHECK_FALSE(parse_logic_manifest("handler = x;", "b").ok());
}

}  // TEST_SUITE
