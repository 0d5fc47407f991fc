#include "iotforge/ast.hpp"

#include <algorithm>

namespace iotforge {

bool is_primitive_type(std::string_view name) {
    return std::any_of(std::begin(kPrimitiveTypes), std::end(kPrimitiveTypes),
                       [&](const char* p) { return name == p; });
}

bool is_numeric_type(std::string_view name) { return name == "double" || name == "long"; }

namespace {

template <typename T>
const T* find_named(const std::vector<T>& items, std::string_view n) {
    auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return x.name == n; });
    return it == items.end() ? nullptr : &*it;
}

bool eq(const TypedName& a, const TypedName& b) { return a.name == b.name && a.type == b.type; }

template <typename T, typename Eq>
bool all_eq(const std::vector<T>& a, const std::vector<T>& b, Eq&& e) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), e);
}

bool eq_typed(const std::vector<TypedName>& a, const std::vector<TypedName>& b) {
    return all_eq(a, b, [](const TypedName& x, const TypedName& y) { return eq(x, y); });
}

bool eq_params(const std::vector<LogicParam>& a, const std::vector<LogicParam>& b) {
    return all_eq(a, b, [](const LogicParam& x, const LogicParam& y) {
        return x.key == y.key && x.value == y.value;
    });
}

}  // namespace

const RecordDecl* VocabularySpec::find_record(std::string_view n) const {
    return find_named(records, n);
}
const SensorDecl* VocabularySpec::find_sensor(std::string_view n) const {
    return find_named(sensors, n);
}
const ActuatorDecl* VocabularySpec::find_actuator(std::string_view n) const {
    return find_named(actuators, n);
}
const StorageDecl* VocabularySpec::find_storage(std::string_view n) const {
    return find_named(storages, n);
}
bool VocabularySpec::has_region(std::string_view n) const {
    return find_named(regions, n) != nullptr;
}
std::size_t VocabularySpec::resource_count() const {
    return sensors.size() + actuators.size() + storages.size();
}

const ServiceDecl* ArchitectureSpec::find_service(std::string_view n) const {
    return find_named(services, n);
}

std::optional<std::int64_t> DeviceDecl::coord(std::string_view region) const {
    for (const auto& c : coords) {
        if (c.region == region) return c.value;
    }
    return std::nullopt;
}

bool DeviceDecl::hosts(std::string_view resource) const {
    return std::find(resources.begin(), resources.end(), resource) != resources.end();
}

const DeviceDecl* DeploymentSpec::find_device(std::string_view n) const {
    return find_named(devices, n);
}

const HandlerBinding* LogicManifest::find(std::string_view key) const {
    auto it = std::find_if(handlers.begin(), handlers.end(),
                           [&](const HandlerBinding& h) { return h.key == key; });
    return it == handlers.end() ? nullptr : &*it;
}

const DriverBinding* DriverManifest::find(std::string_view resource) const {
    auto it = std::find_if(drivers.begin(), drivers.end(),
                           [&](const DriverBinding& d) { return d.resource == resource; });
    return it == drivers.end() ? nullptr : &*it;
}

bool same_structure(const VocabularySpec& a, const VocabularySpec& b) {
    return a.name == b.name &&
           all_eq(a.regions, b.regions,
                  [](const RegionDecl& x, const RegionDecl& y) { return x.name == y.name; }) &&
           all_eq(a.records, b.records,
                  [](const RecordDecl& x, const RecordDecl& y) {
                      return x.name == y.name && eq_typed(x.fields, y.fields);
                  }) &&
           all_eq(a.sensors, b.sensors,
                  [](const SensorDecl& x, const SensorDecl& y) {
                      return x.name == y.name && eq_typed(x.generates, y.generates);
                  }) &&
           all_eq(a.actuators, b.actuators,
                  [](const ActuatorDecl& x, const ActuatorDecl& y) {
                      return x.name == y.name &&
                             all_eq(x.actions, y.actions, [](const ActionDecl& p, const ActionDecl& q) {
                                 return p.name == q.name && eq_typed(p.params, q.params);
                             });
                  }) &&
           all_eq(a.storages, b.storages, [](const StorageDecl& x, const StorageDecl& y) {
               return x.name == y.name && x.data_name == y.data_name &&
                      x.data_type == y.data_type && x.key_name == y.key_name &&
                      x.key_type == y.key_type;
           });
}

bool same_structure(const ArchitectureSpec& a, const ArchitectureSpec& b) {
    auto same_service = [](const ServiceDecl& x, const ServiceDecl& y) {
        return x.name == y.name && x.scope == y.scope &&
               all_eq(x.consumes, y.consumes,
                      [](const ConsumeClause& p, const ConsumeClause& q) {
                          return p.data_name == q.data_name && p.window == q.window &&
                                 p.period_ms == q.period_ms;
                      }) &&
               eq_typed(x.produces, y.produces) &&
               all_eq(x.requests, y.requests,
                      [](const RequestClause& p, const RequestClause& q) {
                          return p.data_name == q.data_name && p.key_arg == q.key_arg &&
                                 p.storage_name == q.storage_name;
                      }) &&
               all_eq(x.commands, y.commands,
                      [](const CommandClause& p, const CommandClause& q) {
                          return p.action_name == q.action_name && p.args == q.args &&
                                 p.actuator_name == q.actuator_name;
                      }) &&
               x.logic.kind == y.logic.kind && x.logic.builtin_name == y.logic.builtin_name &&
               x.logic.handler_key == y.logic.handler_key &&
               eq_params(x.logic.builtin_params, y.logic.builtin_params);
    };
    return a.name == b.name && a.vocabulary_name == b.vocabulary_name &&
           all_eq(a.services, b.services, same_service);
}

bool same_structure(const DeploymentSpec& a, const DeploymentSpec& b) {
    return a.name == b.name && a.vocabulary_name == b.vocabulary_name &&
           all_eq(a.devices, b.devices, [](const DeviceDecl& x, const DeviceDecl& y) {
               return x.name == y.name && x.platform == y.platform && x.resources == y.resources &&
                      all_eq(x.coords, y.coords, [](const RegionCoord& p, const RegionCoord& q) {
                          return p.region == q.region && p.value == q.value;
                      });
           });
}

}  // namespace iotforge
