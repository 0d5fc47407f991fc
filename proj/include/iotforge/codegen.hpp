/// @file codegen.hpp
/// @brief Generated frameworks and the linker.
///
/// The architecture framework is one LogicContract per service: the typed
/// slots a logic implementation sees. The vocabulary framework is one
/// DriverContract per resource. The linker packs contracts, topic wiring,
/// sampling timers, request endpoints, and command targets into one
/// self-contained DevicePackage per deployed device.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iotforge/ast.hpp"
#include "iotforge/diagnostic.hpp"
#include "iotforge/mapper.hpp"
#include "iotforge/resolver.hpp"

#include "json.hpp"

namespace iotforge {

enum class Delivery { Periodic, Event };
std::string_view delivery_name(Delivery d);

struct InputSlot {
    std::string data_name;
    std::string data_type;
    Delivery delivery = Delivery::Event;
    std::optional<std::uint32_t> window;
    std::optional<std::int64_t> period_ms;
    DataOrigin origin = DataOrigin::Sensor;
};

struct OutputSlot {
    std::string data_name;
    std::string data_type;
};

struct RequestSlot {
    std::string data_name;
    std::string data_type;
    std::string key_arg;
    std::string key_type;
    std::string storage;
};

struct CommandSlot {
    std::string action;
    std::string actuator;
    std::vector<std::string> args;
    std::vector<std::string> arg_types;
};

struct LogicContract {
    std::string service;
    std::string scope_region;
    std::vector<InputSlot> inputs;
    std::vector<OutputSlot> outputs;
    std::vector<RequestSlot> requests;
    std::vector<CommandSlot> commands;

    const InputSlot* input(std::string_view data) const;
    const OutputSlot* output(std::string_view data) const;
};

enum class ResourceKind { Sensor, Actuator, Storage };
std::string_view resource_kind_name(ResourceKind k);

struct DriverContract {
    std::string resource;
    ResourceKind kind = ResourceKind::Sensor;
    std::vector<TypedName> data_items;  // sensor generates, or the storage item
    std::vector<ActionDecl> actions;    // actuator
    std::string key_name;               // storage
    std::string key_type;               // storage
    /// Host drivers attach under this key; `trace:<Resource>` means the
    /// resource is fed from sensor traces.
    std::string binding_key;
};

struct LogicSpec {
    LogicBinding::Kind kind = LogicBinding::Kind::Builtin;
    std::string name;  // builtin name or handler key
    std::vector<LogicParam> params;
};

struct TimerSpec {
    std::int64_t period_ms = 0;
    std::string data_name;
};

struct RequestEndpoint {
    std::string data_name;
    std::string storage;
    std::string device;
};

struct CommandTarget {
    std::string action;
    std::string actuator;
    std::string device;
    std::vector<RegionCoord> coords;
};

struct TaskBinding {
    ServiceInstance instance;
    LogicSpec logic;
    LogicContract contract;
    std::vector<std::string> input_topics;
    std::vector<std::string> output_topics;
    std::vector<TimerSpec> timers;
    std::vector<RequestEndpoint> request_endpoints;
    std::vector<CommandTarget> command_targets;
};

/// A sensor reading this device publishes, either on every trace update
/// (event) or on a sampling timer (periodic).
struct Publication {
    std::string resource;
    std::string data_name;
    std::string data_type;
    Delivery delivery = Delivery::Event;
    std::optional<std::int64_t> period_ms;
    std::vector<std::string> topics;
};

struct RuntimeConfig {
    std::string broker = "sim://local";
    std::string qos = "exactly-once";
};

struct DevicePackage {
    std::string device;
    std::string platform;
    std::vector<RegionCoord> coords;
    std::vector<TaskBinding> tasks;
    std::vector<DriverContract> drivers;
    std::vector<Publication> publications;
    RuntimeConfig runtime;
};

struct Linkset {
    std::string app;
    std::vector<RecordDecl> records;
    std::vector<DevicePackage> packages;
    std::vector<TopicBinding> topics;

    const DevicePackage* package(std::string_view device) const;
};

/// Contract for one service; slots mirror clauses one-to-one.
LogicContract make_logic_contract(const ResolvedApp& r, const ServiceDecl& s);

std::vector<LogicContract> generate_architecture_framework(const ResolvedApp& r);

/// One contract per resource. `drivers`, when given, sets the binding key;
/// resources absent from it default to trace feeds.
std::vector<DriverContract> generate_vocabulary_framework(const VocabularySpec& v,
                                                          const DriverManifest* drivers = nullptr);

/// Links mapped instances into packages. Fails only on a closure violation,
/// which resolution and mapping should make unreachable.
Outcome<Linkset> link(const ResolvedApp& r, const Mapping& m,
                      const DriverManifest* drivers = nullptr);

/// Subscriptions with no publisher anywhere in the link set.
std::vector<std::string> closure_violations(const Linkset& ls);

// Serialization. Every document is canonical: sorted keys, two-space indent,
// LF line endings, trailing newline.
nlohmann::json param_to_json(const ParamValue& p);
ParamValue param_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const ServiceInstance& i);
ServiceInstance instance_from_json(const nlohmann::json& j);
/// Inverse of ServiceInstance::label(); the region of a GLOBAL label is lost.
ServiceInstance instance_from_label(const std::string& label);
nlohmann::json contract_to_json(const LogicContract& c);
nlohmann::json driver_to_json(const DriverContract& d);
nlohmann::json package_to_json_value(const DevicePackage& p);
std::string package_to_json(const DevicePackage& p);
std::string contracts_to_json(const std::vector<LogicContract>& cs);
std::string drivers_to_json(const std::vector<DriverContract>& ds);
/// `linkset.json`: index of packages (device, file, bytes) plus topic and
/// record tables.
std::string linkset_index_to_json(const Linkset& ls);
std::string canonical_dump(const nlohmann::json& j);

DevicePackage package_from_json(const nlohmann::json& j);
/// Rebuilds a link set from its index and the package documents it lists.
Linkset linkset_from_json(const nlohmann::json& index,
                          const std::vector<nlohmann::json>& packages);

/// Serialized byte length of the package file.
std::size_t package_size(const DevicePackage& p);

}  // namespace iotforge
