/// @file resolver.hpp
/// @brief Cross-specification resolution: checks every name the architecture
/// and deployment use against the vocabulary, expands services into scoped
/// instances, and builds the publish/subscribe topic table.

#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iotforge/ast.hpp"
#include "iotforge/diagnostic.hpp"

namespace iotforge {

enum class DataOrigin { Sensor, Service, Storage };
std::string_view origin_name(DataOrigin o);

struct DataInfo {
    std::string name;
    std::string type;
    DataOrigin origin = DataOrigin::Sensor;
    std::string owner;  // resource or service name
};

/// One expansion of a service over a value of its scope region. A missing
/// value denotes the single GLOBAL instance.
struct ServiceInstance {
    std::string service;
    std::string region;
    std::optional<std::int64_t> value;

    bool is_global() const { return !value.has_value(); }
    /// `Room=1` or `global`.
    std::string scope_label() const;
    /// `Service@Room=1` or `Service@global`.
    std::string label() const;

    bool operator==(const ServiceInstance&) const = default;
};

struct Publisher {
    enum class Kind { Sensor, Task };
    Kind kind = Kind::Sensor;
    std::string device;     // Sensor
    std::string resource;   // Sensor
    ServiceInstance instance;  // Task

    std::string label() const;
    bool operator==(const Publisher&) const = default;
};

struct TopicBinding {
    std::string topic;       // `<data>/<region>=<value>` or `<data>/global`
    std::string data_name;
    std::string scope_path;  // `Room=1` or `global`
    std::vector<Publisher> publishers;
    std::vector<ServiceInstance> subscribers;
};

struct ResolvedApp {
    VocabularySpec vocabulary;
    ArchitectureSpec architecture;
    DeploymentSpec deployment;
    std::map<std::string, DataInfo> data_index;
    std::vector<ServiceInstance> instances;
    std::vector<TopicBinding> topics;
    std::vector<Diagnostic> warnings;

    const DataInfo* data(std::string_view name) const;
    const TopicBinding* topic(std::string_view text) const;
};

std::string make_topic(std::string_view data_name, const ServiceInstance& scope);

/// Resolves all cross-references. Warnings (unconsumed data, services with no
/// instances) are attached to the result; any error fails resolution.
Outcome<ResolvedApp> resolve(const VocabularySpec& v, const ArchitectureSpec& a,
                             const DeploymentSpec& d);

/// Instance expansion: per distinct scope value among the devices hosting
/// producing sensors, or among upstream instances for services fed only by
/// other services. Services whose scope region no upstream binds expand to a
/// single GLOBAL instance. Order: architecture order, then value ascending.
std::vector<ServiceInstance> instantiate_services(const ResolvedApp& r,
                                                  std::vector<Diagnostic>* warnings = nullptr);

/// One binding per (data name, scope value) with publishers and subscribers
/// fully enumerated, sorted by (data name, scope value).
std::vector<TopicBinding> build_topics(const ResolvedApp& r);

/// Canonical `resolved.json` document (sorted keys, two-space indent, LF).
std::string resolved_to_json(const ResolvedApp& r);

}  // namespace iotforge
