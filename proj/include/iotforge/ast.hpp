/// @file ast.hpp
/// @brief Syntax trees for the vocabulary, architecture, and deployment
/// languages, plus the two handwritten manifests (logic and drivers).
///
/// Every node carries the span of the token that introduced it. Structural
/// equality (`same_structure`) ignores spans so that printed-then-reparsed
/// trees compare equal.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "iotforge/diagnostic.hpp"

namespace iotforge {

/// Primitive type names, in the order the grammar lists them.
inline constexpr const char* kPrimitiveTypes[] = {"double", "long", "string", "boolean"};

bool is_primitive_type(std::string_view name);
bool is_numeric_type(std::string_view name);

struct TypedName {
    std::string name;
    std::string type;
    SourceSpan span;
};

// ---------------------------------------------------------------- vocabulary

struct RegionDecl {
    std::string name;
    SourceSpan span;
};

struct RecordDecl {
    std::string name;
    std::vector<TypedName> fields;
    SourceSpan span;
};

struct SensorDecl {
    std::string name;
    std::vector<TypedName> generates;
    SourceSpan span;
};

struct ActionDecl {
    std::string name;
    std::vector<TypedName> params;
    SourceSpan span;
};

struct ActuatorDecl {
    std::string name;
    std::vector<ActionDecl> actions;
    SourceSpan span;
};

struct StorageDecl {
    std::string name;
    std::string data_name;
    std::string data_type;
    std::string key_name;
    std::string key_type;
    SourceSpan span;
};

struct VocabularySpec {
    std::string name;
    std::vector<RegionDecl> regions;
    std::vector<RecordDecl> records;
    std::vector<SensorDecl> sensors;
    std::vector<ActuatorDecl> actuators;
    std::vector<StorageDecl> storages;
    SourceSpan span;

    const RecordDecl* find_record(std::string_view n) const;
    const SensorDecl* find_sensor(std::string_view n) const;
    const ActuatorDecl* find_actuator(std::string_view n) const;
    const StorageDecl* find_storage(std::string_view n) const;
    bool has_region(std::string_view n) const;
    /// Total resource count (sensors + actuators + storages).
    std::size_t resource_count() const;
};

// -------------------------------------------------------------- architecture

/// A literal in a builtin parameter list: `gt=50`, `default=18.5`,
/// `label="x"`, `flag=true`, `on=avgTemp`.
struct ParamValue {
    enum class Kind { Integer, Real, String, Boolean, Ident };
    Kind kind = Kind::Integer;
    std::int64_t integer = 0;
    double real = 0.0;
    std::string text;  // String and Ident
    bool boolean = false;

    double as_number() const { return kind == Kind::Real ? real : static_cast<double>(integer); }
    bool is_number() const { return kind == Kind::Integer || kind == Kind::Real; }
    bool operator==(const ParamValue&) const = default;
};

struct LogicParam {
    std::string key;
    ParamValue value;
    SourceSpan span;
};

struct LogicBinding {
    enum class Kind { Builtin, Extern };
    Kind kind = Kind::Builtin;
    std::string builtin_name;
    std::vector<LogicParam> builtin_params;
    std::string handler_key;
    SourceSpan span;
};

struct ConsumeClause {
    std::string data_name;
    std::optional<std::uint32_t> window;
    std::optional<std::int64_t> period_ms;
    SourceSpan span;
};

struct RequestClause {
    std::string data_name;
    std::string key_arg;
    std::string storage_name;
    SourceSpan span;
};

struct CommandClause {
    std::string action_name;
    std::vector<std::string> args;
    std::string actuator_name;
    SourceSpan span;
};

struct ServiceDecl {
    std::string name;
    std::string scope;
    SourceSpan scope_span;
    std::vector<ConsumeClause> consumes;
    std::vector<TypedName> produces;
    std::vector<RequestClause> requests;
    std::vector<CommandClause> commands;
    LogicBinding logic;
    SourceSpan span;
};

struct ArchitectureSpec {
    std::string name;
    std::string vocabulary_name;
    SourceSpan vocabulary_span;
    std::vector<ServiceDecl> services;
    SourceSpan span;

    const ServiceDecl* find_service(std::string_view n) const;
};

// ---------------------------------------------------------------- deployment

struct RegionCoord {
    std::string region;
    std::int64_t value = 0;
    SourceSpan span;
};

struct DeviceDecl {
    std::string name;
    std::vector<RegionCoord> coords;  // declaration order
    std::vector<std::string> resources;
    std::vector<SourceSpan> resource_spans;
    std::string platform;
    SourceSpan span;

    /// Value bound to `region`, if the device declares that coordinate.
    std::optional<std::int64_t> coord(std::string_view region) const;
    bool hosts(std::string_view resource) const;
};

struct DeploymentSpec {
    std::string name;
    std::string vocabulary_name;
    SourceSpan vocabulary_span;
    std::vector<DeviceDecl> devices;
    SourceSpan span;

    const DeviceDecl* find_device(std::string_view n) const;
};

// ----------------------------------------------------------------- manifests

/// `handler Key = builtinName(params);` binds an extern logic key to its
/// implementation.
struct HandlerBinding {
    std::string key;
    std::string builtin_name;
    std::vector<LogicParam> params;
    SourceSpan span;
};

struct LogicManifest {
    std::vector<HandlerBinding> handlers;
    const HandlerBinding* find(std::string_view key) const;
};

/// `driver Resource = trace;` or `driver Resource = extern Key;`
struct DriverBinding {
    std::string resource;
    bool is_extern = false;
    std::string extern_key;
    SourceSpan span;
};

struct DriverManifest {
    std::vector<DriverBinding> drivers;
    const DriverBinding* find(std::string_view resource) const;
};

// ------------------------------------------------------- structural equality

bool same_structure(const VocabularySpec& a, const VocabularySpec& b);
bool same_structure(const ArchitectureSpec& a, const ArchitectureSpec& b);
bool same_structure(const DeploymentSpec& a, const DeploymentSpec& b);

}  // namespace iotforge
