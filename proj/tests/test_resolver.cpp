#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "iotforge/frontend.hpp"
#include "iotforge/resolver.hpp"
#include "support.hpp"

using namespace iotforge;
using namespace iotforge::testing;

namespace {

Outcome<ResolvedApp> resolve_text(const std::string& v, const std::string& a, const std::string& d) {
    return resolve(must(parse_vocabulary(v, "t.vocab")), must(parse_architecture(a, "t.arch")),
                   must(parse_deployment(d, "t.deploy")));
}

std::string device(const std::string& name, int room, const std::string& res) {
    return "device " + name + " { region: Building = 1, Floor = 1, Room = " + std::to_string(room) +
           "; resources: " + res + "; platform: P; }\n";
}

bool any_message(const std::vector<Diagnostic>& ds, const std::string& needle) {
    return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.message.find(needle) != std::string::npos; });
}

std::vector<std::string> instance_labels(const std::vector<ServiceInstance>& is, const std::string& service = "") {
    std::vector<std::string> out;
    for (const auto& i : is) {
        if (service.empty() || i.service == service) out.push_back(i.label());
    }
    return out;
}

ResolvedApp resolve_corpus(const std::string& app) {
    LoadedProject p = load_app(app);
    return must(resolve(p.vocabulary, p.architecture, p.deployment));
}

const std::string kDeployHead = "deployment D uses Building\n";

}  // namespace

TEST_SUITE("resolver") {

TEST_CASE("fire triple resolves cleanly") {
    ResolvedApp r = resolve_corpus("fire-bedroom");
    CHECK(r.warnings.empty());
    CHECK(r.deployment.devices.size() == 8);
    CHECK(r.data("avgTemp")->origin == DataOrigin::Service);
    CHECK(r.data("tempMeasurement")->owner == "TemperatureSensor");
}

TEST_CASE("empty architecture and deployment") {
    auto r = must(resolve_text(kBuildingVocab, "architecture A uses Building\n", kDeployHead));
    CHECK(r.instances.empty());
    CHECK(r.topics.empty());
}

TEST_CASE("undeclared resource on a device") {
    auto r = resolve_text(kBuildingVocab, "architecture A uses Building\n", kDeployHead + device("S", 1, "Sprinkler"));
    REQUIRE_FALSE(r.ok());
    CHECK(any_message(r.diagnostics(), "is not declared in vocabulary"));
    CHECK(r.diagnostics()[0].span.line == 2);
}

TEST_CASE("fire instance expansion matches a hand expansion") {
    ResolvedApp r = resolve_corpus("fire-bedroom");
    // oracle: rooms of devices hosting the producing sensor
    std::set<std::int64_t> smoke_rooms, temp_rooms;
    for (const auto& d : r.deployment.devices) {
        if (d.hosts("SmokeDetector")) smoke_rooms.insert(*d.coord("Room"));
        if (d.hosts("TemperatureSensor")) temp_rooms.insert(*d.coord("Room"));
    }
    std::vector<std::string> expect_state, expect_avg;
    for (auto v : smoke_rooms) expect_state.push_back("FireStateDetector@Room=" + std::to_string(v));
    for (auto v : temp_rooms) expect_avg.push_back("AverageTempCalculator@Room=" + std::to_string(v));
    CHECK(instance_labels(r.instances, "FireStateDetector") == expect_state);
    CHECK(instance_labels(r.instances, "AverageTempCalculator") == expect_avg);
    CHECK(expect_state.size() == 2);
    // every device shares Building=1 but no upstream binds Building: one global controller
    CHECK(instance_labels(r.instances, "FireController") == std::vector<std::string>{"FireController@global"});
}

TEST_CASE("single room gives one instance") {
    auto r = must(resolve_text(kBuildingVocab, kAvgArch,
                               kDeployHead + device("T1", 4, "TemperatureSensor") + device("T2", 4, "TemperatureSensor")));
    CHECK(instance_labels(r.instances) == std::vector<std::string>{"RoomAvg@Room=4"});
}

TEST_CASE("road traffic: four sector instances per sector service") {
    ResolvedApp r = resolve_corpus("road-traffic");
    std::set<std::int64_t> sectors;
    for (const auto& d : r.deployment.devices) {
        if (d.hosts("SpeedSensor")) sectors.insert(*d.coord("Sector"));
    }
    CHECK(sectors.size() == 4);
    CHECK(instance_labels(r.instances, "AvgSpeed").size() == sectors.size());
    CHECK(instance_labels(r.instances, "RampMetering").size() == sectors.size());
    CHECK(instance_labels(r.instances, "TrafficCoordinator") == std::vector<std::string>{"TrafficCoordinator@global"});
}

TEST_CASE("topics: publishers and subscribers by hand count") {
    ResolvedApp r = resolve_corpus("fire-bedroom");
    const TopicBinding* t = r.topic("tempMeasurement/Room=1");
    REQUIRE(t);
    std::size_t sensors = 0;
    for (const auto& d : r.deployment.devices) sensors += d.hosts("TemperatureSensor") && d.coord("Room") == 1;
    CHECK(t->publishers.size() == sensors);
    CHECK(sensors == 2);
    REQUIRE(t->subscribers.size() == 1);
    CHECK(t->subscribers[0].label() == "AverageTempCalculator@Room=1");

    const TopicBinding* f = r.topic("fireState/Room=1");
    REQUIRE(f);
    REQUIRE(f->publishers.size() == 1);
    CHECK(f->publishers[0].kind == Publisher::Kind::Task);
    CHECK(f->publishers[0].instance.label() == "FireStateDetector@Room=1");
    REQUIRE(f->subscribers.size() == 1);
    CHECK(f->subscribers[0].label() == "FireController@global");
}

TEST_CASE("produced data without a consumer has an empty subscriber list") {
    auto r = must(resolve_text(kBuildingVocab, kAvgArch, kDeployHead + device("T1", 1, "TemperatureSensor")));
    const TopicBinding* t = r.topic("roomTemp/Room=1");
    REQUIRE(t);
    CHECK(t->publishers.size() == 1);
    CHECK(t->subscribers.empty());
    CHECK(any_message(r.warnings, "roomTemp"));
}

TEST_CASE("instance set does not depend on device order") {
    LoadedProject p = load_app("road-traffic");
    auto base = instance_labels(must(resolve(p.vocabulary, p.architecture, p.deployment)).instances);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        DeploymentSpec d = p.deployment;
        std::shuffle(d.devices.begin(), d.devices.end(), rng);
        CHECK(instance_labels(must(resolve(p.vocabulary, p.architecture, d)).instances) == base);
    }
}

TEST_CASE("every subscriber corresponds to a consume clause") {
    for (const auto& app : corpus_apps()) {
        CAPTURE(app);
        ResolvedApp r = resolve_corpus(app);
        for (const auto& t : r.topics) {
            for (const auto& s : t.subscribers) {
                const ServiceDecl* svc = r.architecture.find_service(s.service);
                REQUIRE(svc);
                auto n = std::count_if(svc->consumes.begin(), svc->consumes.end(),
                                       [&](const ConsumeClause& c) { return c.data_name == t.data_name; });
                CHECK(n == 1);
                CHECK(std::find(r.instances.begin(), r.instances.end(), s) != r.instances.end());
            }
        }
    }
}

TEST_CASE("apps over the shared vocabulary resolve against the same value") {
    ResolvedApp a = resolve_corpus("fire-bedroom");
    ResolvedApp b = resolve_corpus("hvac");
    CHECK(same_structure(a.vocabulary, b.vocabulary));
}

TEST_CASE("cross-reference errors") {
    std::string temp = kDeployHead + device("T1", 1, "TemperatureSensor") + device("H1", 1, "Heater") +
                       device("B1", 1, "BadgeReader") + device("DB", 1, "ProfileDB");
    auto fails = [&](const std::string& arch, const std::string& needle) {
        auto r = resolve_text(kBuildingVocab, arch, temp);
        REQUIRE_FALSE(r.ok());
        CHECK(has_errors(r.diagnostics()));
        if (!needle.empty()) CHECK(any_message(r.diagnostics(), needle));
    };
    auto svc = [](const std::string& body) {
        return "architecture A uses Building\nservice S {\n  scope: Room;\n" + body + "  logic: builtin passthrough;\n}\n";
    };
    SUBCASE("vocabulary name mismatch") { fails("architecture A uses Other\n", "Other"); }
    SUBCASE("unknown data") { fails(svc("  consume humidity;\n"), "humidity"); }
    SUBCASE("unknown scope region") {
        fails("architecture A uses Building\nservice S { scope: Wing; consume tempMeasurement; logic: builtin passthrough; }\n",
              "Wing");
    }
    SUBCASE("unknown actuator") { fails(svc("  consume tempMeasurement;\n  command open() to Window;\n"), "Window"); }
    SUBCASE("unknown action") { fails(svc("  consume tempMeasurement;\n  command warm() to Heater;\n"), "warm"); }
    SUBCASE("arity") { fails(svc("  consume tempMeasurement;\n  command setTemp() to Heater;\n"), ""); }
    SUBCASE("argument type") { fails(svc("  consume badgeDetected;\n  command setTemp(badgeDetected) to Heater;\n"), ""); }
    SUBCASE("unknown storage") {
        fails(svc("  consume badgeDetected;\n  request preference(badgeDetected) from Vault;\n"), "Vault");
    }
    SUBCASE("key type") { fails(svc("  consume tempMeasurement;\n  request preference(tempMeasurement) from ProfileDB;\n"), ""); }
    SUBCASE("consumes nothing") { fails(svc(""), ""); }
    SUBCASE("cycle") {
        fails("architecture A uses Building\n"
              "service P { scope: Room; consume tempMeasurement; consume b; produce a : double; logic: builtin passthrough; }\n"
              "service Q { scope: Room; consume a; produce b : double; logic: builtin passthrough; }\n",
              "cyclic");
    }
    SUBCASE("unknown region in device coords") {
        auto r = resolve_text(kBuildingVocab, "architecture A uses Building\n",
                              kDeployHead + "device W { region: Wing = 1; resources: Heater; platform: P; }\n");
        REQUIRE_FALSE(r.ok());
        CHECK(any_message(r.diagnostics(), "Wing"));
    }
}

TEST_CASE("no-instance expansion is a warning") {
    // the only temperature sensor has no Room coordinate
    auto r = resolve_text(kBuildingVocab, kAvgArch,
                          kDeployHead + "device T { region: Building = 1; resources: TemperatureSensor; platform: P; }\n");
    REQUIRE(r.ok());
    CHECK(r.value().instances.empty());
    CHECK(any_message(r.value().warnings, "no instances"));
}

TEST_CASE("resolution is total over mutated architectures") {
    LoadedProject p = load_app("fire-bedroom");
    std::string arch = read_file(app_dir("fire-bedroom") / "spec/app.arch");
    std::mt19937_64 rng(11);
    int resolved = 0, rejected = 0;
    for (int i = 0; i < 400; ++i) {
        auto a = parse_architecture(mutate(arch, rng), "m.arch");
        if (!a.ok()) continue;
        auto r = resolve(p.vocabulary, a.value(), p.deployment);
        if (r.ok()) ++resolved; else {
            ++rejected;
            CHECK(has_errors(r.diagnostics()));
        }
    }
    CHECK(resolved + rejected > 0);
}

}  // TEST_SUITE
