#include <map>

#include "doctest.h"
#include "fixtures.hpp"
#include "iotforge/frontend.hpp"
#include "iotforge/mapper.hpp"
#include "support.hpp"

using namespace iotforge;
using namespace iotforge::testing;

namespace {

ResolvedApp resolve_corpus(const std::string& app) {
    LoadedProject p = load_app(app);
    return must(resolve(p.vocabulary, p.architecture, p.deployment));
}

ResolvedApp four_sensor_room() {
    std::string d = "deployment D uses Building\n";
    for (int i = 1; i <= 4; ++i) {
        d += "device T" + std::to_string(i) +
             " { region: Building = 1, Room = 1; resources: TemperatureSensor; platform: P; }\n";
    }
    return must(resolve(must(parse_vocabulary(kBuildingVocab, "v")), must(parse_architecture(kAvgArch, "a")),
                        must(parse_deployment(d, "d"))));
}

// Independent validity check: the device exists and binds the scope value.
bool placement_ok(const ResolvedApp& r, const Assignment& a) {
    const DeviceDecl* d = r.deployment.find_device(a.device);
    if (!d) return false;
    if (a.instance.is_global()) return true;
    return d->coord(a.instance.region) == a.instance.value;
}

}  // namespace

TEST_SUITE("mapper") {

TEST_CASE("SplitMix64 reference outputs") {
    SplitMix64 g(1234567);
    CHECK(g.next() == 6457827717110365317ULL);
    CHECK(g.next() == 3203168211198807973ULL);
    CHECK(g.next() == 9817491932198370423ULL);
}

TEST_CASE("eligible devices for a room instance") {
    ResolvedApp r = resolve_corpus("fire-bedroom");
    std::vector<std::string> expect;
    for (const auto& d : r.deployment.devices) {
        if (d.coord("Room") == 1) expect.push_back(d.name);
    }
    CHECK(expect.size() == 4);
    CHECK(eligible_devices(ServiceInstance{"FireStateDetector", "Room", 1}, r) == expect);
}

TEST_CASE("global instance over one device") {
    ResolvedApp r = resolve_corpus("fire-bedroom");
    r.deployment.devices.resize(1);
    CHECK(eligible_devices(ServiceInstance{"FireController", "Building", std::nullopt}, r) ==
          std::vector<std::string>{"Temp1"});
}

TEST_CASE("an instance nobody can host") {
    ResolvedApp r = resolve_corpus("fire-bedroom");
    r.instances.push_back(ServiceInstance{"FireStateDetector", "Room", 9});
    CHECK(eligible_devices(r.instances.back(), r).empty());
    auto m = map_random(r, 42);
    REQUIRE_FALSE(m.ok());
    CHECK(m.diagnostics()[0].message.find("Room=9") != std::string::npos);
}

TEST_CASE("same seed, same mapping") {
    ResolvedApp r = resolve_corpus("road-traffic");
    CHECK(mapping_to_json(must(map_random(r, 42))) == mapping_to_json(must(map_random(r, 42))));
}

TEST_CASE("100 seeds on every corpus app stay valid") {
    for (const auto& app : corpus_apps()) {
        CAPTURE(app);
        ResolvedApp r = resolve_corpus(app);
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            Mapping m = must(map_random(r, seed));
            CHECK(validate_mapping(m, r).empty());
            REQUIRE(m.assignments.size() == r.instances.size());
            for (std::size_t i = 0; i < m.assignments.size(); ++i) {
                CHECK(m.assignments[i].instance == r.instances[i]);
                CHECK(placement_ok(r, m.assignments[i]));
            }
        }
    }
}

TEST_CASE("one eligible device wins for every seed") {
    std::string d =
        "deployment D uses Building\n"
        "device Only { region: Building = 1, Room = 1; resources: TemperatureSensor; platform: P; }\n";
    ResolvedApp r = must(resolve(must(parse_vocabulary(kBuildingVocab, "v")), must(parse_architecture(kAvgArch, "a")),
                                 must(parse_deployment(d, "d"))));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        CHECK(must(map_random(r, seed)).assignments.at(0).device == "Only");
    }
}

TEST_CASE("validate_mapping flags a corrupted placement") {
    ResolvedApp r = resolve_corpus("fire-bedroom");
    Mapping m = must(map_random(r, 42));
    CHECK(validate_mapping(m, r).empty());
    for (auto& a : m.assignments) {
        if (a.instance.label() == "FireStateDetector@Room=1") a.device = "Temp3";  // Room=2
    }
    CHECK(validate_mapping(m, r).size() == 1);
}

TEST_CASE("empty app, empty mapping") {
    ResolvedApp r;
    CHECK(validate_mapping(Mapping{}, r).empty());
    CHECK(must(map_random(r, 1)).assignments.empty());
}

TEST_CASE("missing and duplicate assignments are violations") {
    ResolvedApp r = resolve_corpus("fire-bedroom");
    Mapping m = must(map_random(r, 42));
    Mapping missing = m;
    missing.assignments.pop_back();
    CHECK_FALSE(validate_mapping(missing, r).empty());
    Mapping dup = m;
    dup.assignments.push_back(dup.assignments.front());
    CHECK_FALSE(validate_mapping(dup, r).empty());
}

TEST_CASE("selection is uniform over four eligible devices") {
    ResolvedApp r = four_sensor_room();
    REQUIRE(r.instances.size() == 1);
    REQUIRE(eligible_devices(r.instances[0], r).size() == 4);
    std::map<std::string, int> counts;
    const int n = 10000;
    for (int seed = 0; seed < n; ++seed) ++counts[must(map_random(r, static_cast<std::uint64_t>(seed))).assignments[0].device];
    REQUIRE(counts.size() == 4);
    for (const auto& [dev, c] : counts) {
        CAPTURE(dev);
        double f = static_cast<double>(c) / n;
        CHECK(f >= 0.22);
        CHECK(f <= 0.28);
    }
}

TEST_CASE("mapping JSON round trip") {
    ResolvedApp r = resolve_corpus("hvac");
    Mapping m = must(map_random(r, 7));
    std::string text = mapping_to_json(m);
    Mapping back = must(mapping_from_json(text, r));
    CHECK(mapping_to_json(back) == text);
    CHECK(back.seed == 7);
    CHECK_FALSE(mapping_from_json("{ not json", r).ok());
}

}  // TEST_SUITE
