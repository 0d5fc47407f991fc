#include "iotforge/mapper.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "iotforge/codegen.hpp"

namespace iotforge {

const std::string* Mapping::device_for(const ServiceInstance& inst) const {
    for (const auto& a : assignments) {
        if (a.instance == inst) return &a.device;
    }
    return nullptr;
}

std::vector<std::string> eligible_devices(const ServiceInstance& inst, const ResolvedApp& r) {
    std::vector<std::string> out;
    for (const auto& dev : r.deployment.devices) {
        if (inst.is_global() || dev.coord(inst.region) == inst.value) out.push_back(dev.name);
    }
    return out;
}

Outcome<Mapping> map_random(const ResolvedApp& r, std::uint64_t seed) {
    Mapping m;
    m.seed = seed;
    SplitMix64 rng(seed);
    std::vector<Diagnostic> errors;
    for (const auto& inst : r.instances) {
        auto eligible = eligible_devices(inst, r);
        if (eligible.empty()) {
            const ServiceDecl* s = r.architecture.find_service(inst.service);
            errors.push_back(Diagnostic{s ? s->span : SourceSpan{}, Severity::Error,
                                        "no device can host " + inst.label()});
            continue;
        }
        m.assignments.push_back(Assignment{inst, eligible[rng.pick(eligible.size())]});
    }
    if (!errors.empty()) return errors;
    return m;
}

std::vector<Violation> validate_mapping(const Mapping& m, const ResolvedApp& r) {
    std::vector<Violation> out;
    for (const auto& inst : r.instances) {
        auto n = std::count_if(m.assignments.begin(), m.assignments.end(),
                               [&](const Assignment& a) { return a.instance == inst; });
        if (n == 0) out.push_back({inst.label() + " is not assigned to any device"});
        if (n > 1) out.push_back({inst.label() + " is assigned more than once"});
    }
    for (const auto& a : m.assignments) {
        if (std::find(r.instances.begin(), r.instances.end(), a.instance) == r.instances.end()) {
            out.push_back({a.instance.label() + " is not an instance of this application"});
            continue;
        }
        const DeviceDecl* dev = r.deployment.find_device(a.device);
        if (!dev) {
            out.push_back({a.instance.label() + " is assigned to unknown device '" + a.device + "'"});
        } else if (!a.instance.is_global() && dev->coord(a.instance.region) != a.instance.value) {
            out.push_back({a.instance.label() + " is assigned to device '" + a.device +
                           "' outside its scope"});
        }
    }
    return out;
}

std::string mapping_to_json(const Mapping& m) {
    std::vector<const Assignment*> sorted;
    for (const auto& a : m.assignments) sorted.push_back(&a);
    std::stable_sort(sorted.begin(), sorted.end(), [](const Assignment* a, const Assignment* b) {
        auto key = [](const Assignment* x) {
            return std::make_tuple(x->instance.service, x->instance.value.has_value(),
                                   x->instance.value.value_or(0));
        };
        return key(a) < key(b);
    });
    nlohmann::json arr = nlohmann::json::array();
    for (const auto* a : sorted) {
        arr.push_back({{"service", a->instance.service},
                       {"scope", a->instance.scope_label()},
                       {"device", a->device}});
    }
    return canonical_dump({{"seed", m.seed}, {"assignments", arr}});
}

Outcome<Mapping> mapping_from_json(std::string_view text, const ResolvedApp& r) {
    auto err = [](std::string msg) {
        return std::vector<Diagnostic>{Diagnostic{{"mapping.json"}, Severity::Error, msg}};
    };
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return err("malformed mapping document");
    if (!j.contains("seed") || !j["seed"].is_number_unsigned() || !j.contains("assignments") ||
        !j["assignments"].is_array()) {
        return err("mapping document needs 'seed' and 'assignments'");
    }
    std::map<std::pair<std::string, std::string>, std::string> by_key;
    for (const auto& a : j["assignments"]) {
        if (!a.is_object() || !a.value("service", nlohmann::json()).is_string() ||
            !a.value("scope", nlohmann::json()).is_string() ||
            !a.value("device", nlohmann::json()).is_string()) {
            return err("malformed assignment entry");
        }
        by_key[{a["service"].get<std::string>(), a["scope"].get<std::string>()}] =
            a["device"].get<std::string>();
    }
    Mapping m;
    m.seed = j["seed"].get<std::uint64_t>();
    for (const auto& inst : r.instances) {
        auto it = by_key.find({inst.service, inst.scope_label()});
        if (it == by_key.end()) return err("mapping has no assignment for " + inst.label());
        m.assignments.push_back(Assignment{inst, it->second});
    }
    if (by_key.size() != m.assignments.size()) {
        return err("mapping assigns instances this application does not have");
    }
    return m;
}

}  // namespace iotforge
