/// @file runtime.hpp
/// @brief Discrete-event execution of a link set.
///
/// One process hosts every device package. A broker delivers each publish to
/// every subscriber exactly once, in FIFO order per topic, after a constant
/// per-hop latency. Sensors are fed from traces or extern drivers; periodic
/// publications sample the latest reading at t = 0, P, 2P, ... up to the
/// horizon. Sources stop at the horizon; messages already in flight drain.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iotforge/builtins.hpp"
#include "iotforge/codegen.hpp"
#include "iotforge/diagnostic.hpp"
#include "iotforge/value.hpp"

#include "json.hpp"

namespace iotforge {

struct SimConfig {
    std::int64_t horizon_ms = 0;
    std::int64_t latency_ms = 5;
    std::int64_t request_latency_ms = 1;
    std::uint64_t seed = 0;  // carried for reproducibility records; the run itself draws nothing
};

struct TraceEntry {
    std::int64_t t = 0;
    std::string device;
    std::string resource;
    std::string data;
    nlohmann::json value;
    std::optional<nlohmann::json> key;  // storage entries only
    SourceSpan span;
};

struct SensorTrace {
    std::vector<TraceEntry> entries;
};

/// Line-delimited JSON. Blank lines are skipped; entries must be sorted by t.
Outcome<SensorTrace> parse_trace(std::string_view text, std::string_view file);
std::string trace_to_text(const SensorTrace& trace);

struct ActuationEntry {
    std::int64_t t = 0;
    std::string device;
    std::string resource;
    std::string action;
    std::vector<Value> args;
};

using ActuationLog = std::vector<ActuationEntry>;

/// `{"t":..,"device":..,"resource":..,"action":..,"args":[..]}` per line.
std::string actuation_log_to_text(const ActuationLog& log);

/// Raised for failures during setup or execution; the message names the
/// device, service, or trace line involved.
class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Reading {
    std::int64_t t = 0;
    Value value;
};

struct DriverQuery {
    std::string device;
    std::string resource;
    std::string data;
    std::int64_t horizon_ms = 0;
};

/// Extern sensor driver: readings for one (device, resource, data) stream.
using DriverFunction = std::function<std::vector<Reading>(const DriverQuery&)>;

/// Builds a step function for one task from its contract.
using HandlerFactory = std::function<LogicFunction(const LogicContract&)>;

/// Expected slot names, checked against the contract at run start.
struct HandlerSignature {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

class HandlerRegistry {
public:
    /// Throws std::invalid_argument when `key` is already registered.
    void register_handler(const std::string& key, LogicFunction fn,
                          std::optional<HandlerSignature> signature = std::nullopt);
    void register_factory(const std::string& key, HandlerFactory factory);
    void register_driver(const std::string& key, DriverFunction fn);

    bool has_handler(const std::string& key) const { return handlers_.count(key) > 0; }
    bool has_driver(const std::string& key) const { return drivers_.count(key) > 0; }

    /// Step function for `contract`; throws SimError on a signature mismatch.
    LogicFunction instantiate(const std::string& key, const LogicContract& contract) const;
    const DriverFunction& driver(const std::string& key) const { return drivers_.at(key); }

private:
    struct Entry {
        HandlerFactory factory;
        std::optional<HandlerSignature> signature;
    };
    std::map<std::string, Entry> handlers_;
    std::map<std::string, DriverFunction> drivers_;
};

struct SimResult {
    ActuationLog log;
    std::map<std::string, std::uint64_t> published;  // per topic
    std::map<std::string, std::uint64_t> delivered;  // per topic, summed over subscribers
    /// Task label -> data name -> deliveries received.
    std::map<std::string, std::map<std::string, std::uint64_t>> received;
    std::map<std::string, std::uint64_t> invocations;  // task label -> logic steps
    /// Task label -> data name -> window contents at the end of the run.
    std::map<std::string, std::map<std::string, std::vector<Value>>> final_states;
    std::uint64_t events_processed = 0;
};

class Simulator {
public:
    /// Throws SimError when an extern handler or driver is missing.
    Simulator(Linkset linkset, const HandlerRegistry& handlers, SimConfig config);
    ~Simulator();
    Simulator(Simulator&&) noexcept;
    Simulator& operator=(Simulator&&) noexcept;

    /// Throws SimError when `device` does not host `storage`.
    void storage_put(const std::string& device, const std::string& storage, const Value& key,
                     const Value& value);
    std::optional<Value> storage_get(const std::string& device, const std::string& storage,
                                     const Value& key) const;

    /// Runs to quiescence. A simulator runs once.
    SimResult run(const std::vector<SensorTrace>& traces);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SimResult simulate(const Linkset& linkset, const std::vector<SensorTrace>& traces,
                   const HandlerRegistry& handlers, const SimConfig& config);

/// Registers every `handler Key = builtin(...)` entry of a logic manifest.
void register_manifest(HandlerRegistry& registry, const LogicManifest& manifest);

}  // namespace iotforge
