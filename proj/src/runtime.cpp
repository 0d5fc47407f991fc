#include "iotforge/runtime.hpp"

#include <algorithm>
#include <queue>
#include <sstream>
#include <tuple>

namespace iotforge {

using nlohmann::json;

// ------------------------------------------------------------------- traces

Outcome<SensorTrace> parse_trace(std::string_view text, std::string_view file) {
    SensorTrace trace;
    std::vector<Diagnostic> errors;
    std::uint32_t line_no = 0;
    std::int64_t last_t = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        SourceSpan span{std::string(file), line_no, 1, static_cast<std::uint32_t>(line.size())};
        auto fail = [&](std::string msg) { errors.push_back(Diagnostic{span, Severity::Error, std::move(msg)}); };
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            fail("malformed trace entry: expected one JSON object per line");
            continue;
        }
        if (!j.contains("t") || !j["t"].is_number_integer() || j["t"].get<std::int64_t>() < 0) {
            fail("trace entry needs a non-negative integer 't'");
            continue;
        }
        bool fields_ok = true;
        for (const char* f : {"device", "resource", "data"}) {
            if (!j.contains(f) || !j[f].is_string()) {
                fail(std::string("trace entry needs a string '") + f + "'");
                fields_ok = false;
                break;
            }
        }
        if (!fields_ok) continue;
        if (!j.contains("value")) {
            fail("trace entry needs a 'value'");
            continue;
        }
        TraceEntry e;
        e.t = j["t"].get<std::int64_t>();
        e.device = j["device"].get<std::string>();
        e.resource = j["resource"].get<std::string>();
        e.data = j["data"].get<std::string>();
        e.value = j["value"];
        if (j.contains("key")) e.key = j["key"];
        e.span = span;
        if (!trace.entries.empty() && e.t < last_t) {
            fail("trace entries must be sorted by time (" + std::to_string(e.t) + " after " +
                 std::to_string(last_t) + ")");
            continue;
        }
        last_t = e.t;
        trace.entries.push_back(std::move(e));
    }
    if (!errors.empty()) return errors;
    return trace;
}

std::string trace_to_text(const SensorTrace& trace) {
    std::string out;
    for (const auto& e : trace.entries) {
        out += "{\"t\":" + std::to_string(e.t) + ",\"device\":" + json(e.device).dump() +
               ",\"resource\":" + json(e.resource).dump() + ",\"data\":" + json(e.data).dump();
        if (e.key) out += ",\"key\":" + e.key->dump();
        out += ",\"value\":" + e.value.dump() + "}\n";
    }
    return out;
}

std::string actuation_log_to_text(const ActuationLog& log) {
    std::string out;
    for (const auto& e : log) {
        json args = json::array();
        for (const auto& a : e.args) args.push_back(value_to_json(a));
        out += "{\"t\":" + std::to_string(e.t) + ",\"device\":" + json(e.device).dump() +
               ",\"resource\":" + json(e.resource).dump() + ",\"action\":" + json(e.action).dump() +
               ",\"args\":" + args.dump() + "}\n";
    }
    return out;
}

// ----------------------------------------------------------------- registry

void HandlerRegistry::register_handler(const std::string& key, LogicFunction fn,
                                       std::optional<HandlerSignature> signature) {
    if (handlers_.count(key)) throw std::invalid_argument("handler '" + key + "' is already registered");
    handlers_[key] = Entry{[fn](const LogicContract&) { return fn; }, std::move(signature)};
}

void HandlerRegistry::register_factory(const std::string& key, HandlerFactory factory) {
    if (handlers_.count(key)) throw std::invalid_argument("handler '" + key + "' is already registered");
    handlers_[key] = Entry{std::move(factory), std::nullopt};
}

void HandlerRegistry::register_driver(const std::string& key, DriverFunction fn) {
    if (drivers_.count(key)) throw std::invalid_argument("driver '" + key + "' is already registered");
    drivers_[key] = std::move(fn);
}

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& i : items) out += (out.empty() ? "" : ", ") + i;
    return "[" + out + "]";
}

}  // namespace

LogicFunction HandlerRegistry::instantiate(const std::string& key, const LogicContract& contract) const {
    auto it = handlers_.find(key);
    if (it == handlers_.end()) {
        throw SimError("missing handler '" + key + "' for service '" + contract.service + "'");
    }
    if (const auto& sig = it->second.signature) {
        std::vector<std::string> in, out;
        for (const auto& s : contract.inputs) in.push_back(s.data_name);
        for (const auto& s : contract.outputs) out.push_back(s.data_name);
        if (sig->inputs != in || sig->outputs != out) {
            throw SimError("handler '" + key + "' does not match the contract of service '" +
                           contract.service + "': contract has inputs " + join(in) +
                           " and outputs " + join(out));
        }
    }
    try {
        return it->second.factory(contract);
    } catch (const std::invalid_argument& e) {
        throw SimError("handler '" + key + "' does not match the contract of service '" +
                       contract.service + "': " + e.what());
    }
}

void register_manifest(HandlerRegistry& registry, const LogicManifest& manifest) {
    for (const auto& h : manifest.handlers) {
        std::string name = h.builtin_name;
        std::vector<LogicParam> params = h.params;
        registry.register_factory(h.key, [name, params](const LogicContract& c) {
            return make_builtin(name, params, c);
        });
    }
}

// ---------------------------------------------------------------- simulator

namespace {

enum class EventKind { Reading, Sample, Delivery, Response, Command };

struct Event {
    std::int64_t t = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::Reading;
    std::size_t pkg = 0;    // Reading, Sample
    std::size_t index = 0;  // Sample: publication; Delivery, Response: task
    std::string resource;   // Reading, Command
    std::string data;       // Reading, Delivery, Response
    std::string topic;      // Delivery
    std::string scope;      // Delivery, Response
    std::string device;     // Command
    std::string action;     // Command
    Value value;            // Reading, Delivery; Response key
    std::optional<Value> key;  // storage Reading
    std::vector<Value> args;   // Command
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        return std::tie(a.t, a.seq) > std::tie(b.t, b.seq);
    }
};

struct TaskRuntime {
    std::size_t pkg = 0;
    const TaskBinding* binding = nullptr;
    LogicFunction fn;
    std::map<std::string, SlotState> slots;
    std::string label;
};

std::string topic_data(const std::string& topic) { return topic.substr(0, topic.find('/')); }
std::string topic_scope(const std::string& topic) {
    auto slash = topic.find('/');
    return slash == std::string::npos ? std::string() : topic.substr(slash + 1);
}

}  // namespace

struct Simulator::Impl {
    Linkset ls;
    SimConfig cfg;
    const HandlerRegistry* registry = nullptr;
    std::vector<TaskRuntime> tasks;
    std::map<std::string, std::vector<std::size_t>> subscribers;
    std::map<std::string, std::size_t> device_index;
    std::map<std::pair<std::string, std::string>, std::map<std::string, Value>> storages;
    std::map<std::tuple<std::size_t, std::string, std::string>, Value> readings;
    std::priority_queue<Event, std::vector<Event>, Later> queue;
    std::uint64_t next_seq = 0;
    SimResult result;
    bool ran = false;

    void push(Event e) {
        e.seq = next_seq++;
        queue.push(std::move(e));
    }

    const DriverContract* driver(std::size_t pkg, const std::string& resource) const {
        for (const auto& d : ls.packages[pkg].drivers) {
            if (d.resource == resource) return &d;
        }
        return nullptr;
    }

    const DriverContract& storage_driver(const std::string& device, const std::string& storage) const {
        auto it = device_index.find(device);
        const DriverContract* d = it == device_index.end() ? nullptr : driver(it->second, storage);
        if (!d || d->kind != ResourceKind::Storage) {
            throw SimError("device '" + device + "' hosts no storage '" + storage + "'");
        }
        return *d;
    }

    void publish(const std::string& topic, const Value& v, std::int64_t t) {
        ++result.published[topic];
        auto it = subscribers.find(topic);
        if (it == subscribers.end()) return;
        for (std::size_t task : it->second) {
            ++result.delivered[topic];
            Event e;
            e.t = t + cfg.latency_ms;
            e.kind = EventKind::Delivery;
            e.index = task;
            e.topic = topic;
            e.data = topic_data(topic);
            e.scope = topic_scope(topic);
            e.value = v;
            push(std::move(e));
        }
    }

    void step(std::size_t index, StepContext ctx, std::int64_t t) {
        TaskRuntime& task = tasks[index];
        const TaskBinding& b = *task.binding;
        ctx.contract = &b.contract;
        ctx.inputs = &task.slots;
        ++result.invocations[task.label];
        StepResult r;
        try {
            r = task.fn(ctx);
        } catch (const SimError&) {
            throw;
        } catch (const std::exception& e) {
            throw SimError("logic of " + task.label + " on device '" + ls.packages[task.pkg].device +
                           "' failed: " + e.what());
        }
        for (const auto& [data, value] : r.outputs) {
            const OutputSlot* out = b.contract.output(data);
            if (!out) throw SimError(task.label + " produced undeclared data '" + data + "'");
            if (!value_has_type(value, out->data_type, ls.records)) {
                throw SimError(task.label + " produced '" + data + "' of the wrong type (expected " +
                               out->data_type + ", got " + value_to_text(value) + ")");
            }
            for (const auto& topic : b.output_topics) {
                if (topic_data(topic) == data) publish(topic, value, t);
            }
        }
        if (r.fire) fire_commands(task, r, ctx.trigger_scope, t);
        for (const auto& [data, key] : r.requests) {
            auto ep = std::find_if(b.request_endpoints.begin(), b.request_endpoints.end(),
                                   [&](const RequestEndpoint& e) { return e.data_name == data; });
            if (ep == b.request_endpoints.end()) {
                throw SimError(task.label + " requested undeclared data '" + data + "'");
            }
            Event e;
            e.t = t + cfg.request_latency_ms;
            e.kind = EventKind::Response;
            e.index = index;
            e.data = data;
            e.value = key;
            e.scope = ctx.trigger_scope;
            push(std::move(e));
        }
    }

    void fire_commands(const TaskRuntime& task, const StepResult& r, const std::string& scope,
                       std::int64_t t) {
        const TaskBinding& b = *task.binding;
        // A GLOBAL instance acts on the scope of the message that triggered it.
        std::optional<std::pair<std::string, std::int64_t>> narrow;
        auto eq = scope.find('=');
        if (b.instance.is_global() && eq != std::string::npos) {
            narrow = std::make_pair(scope.substr(0, eq), std::stoll(scope.substr(eq + 1)));
        }
        for (const auto& cmd : b.contract.commands) {
            std::vector<Value> args;
            for (const auto& arg : cmd.args) {
                auto produced = std::find_if(r.outputs.begin(), r.outputs.end(),
                                             [&](const auto& o) { return o.first == arg; });
                if (produced != r.outputs.end()) {
                    args.push_back(produced->second);
                    continue;
                }
                auto slot = task.slots.find(arg);
                if (slot == task.slots.end() || slot->second.window.empty()) {
                    throw SimError(task.label + " has no value for command argument '" + arg + "'");
                }
                args.push_back(slot->second.latest());
            }
            for (const auto& target : b.command_targets) {
                if (target.action != cmd.action || target.actuator != cmd.actuator) continue;
                if (narrow) {
                    bool outside = std::any_of(target.coords.begin(), target.coords.end(), [&](const RegionCoord& c) {
                        return c.region == narrow->first && c.value != narrow->second;
                    });
                    if (outside) continue;
                }
                Event e;
                e.t = t + cfg.latency_ms;
                e.kind = EventKind::Command;
                e.device = target.device;
                e.resource = target.actuator;
                e.action = target.action;
                e.args = args;
                push(std::move(e));
            }
        }
    }

    void handle(const Event& e) {
        switch (e.kind) {
            case EventKind::Reading: {
                if (e.key) {
                    const auto& dev = ls.packages[e.pkg].device;
                    storages[{dev, e.resource}][value_to_text(*e.key)] = e.value;
                    return;
                }
                readings[{e.pkg, e.resource, e.data}] = e.value;
                for (const auto& pub : ls.packages[e.pkg].publications) {
                    if (pub.delivery == Delivery::Event && pub.resource == e.resource && pub.data_name == e.data) {
                        for (const auto& topic : pub.topics) publish(topic, e.value, e.t);
                    }
                }
                return;
            }
            case EventKind::Sample: {
                const Publication& pub = ls.packages[e.pkg].publications[e.index];
                auto it = readings.find({e.pkg, pub.resource, pub.data_name});
                if (it != readings.end()) {
                    for (const auto& topic : pub.topics) publish(topic, it->second, e.t);
                }
                std::int64_t next = e.t + *pub.period_ms;
                if (next <= cfg.horizon_ms) {
                    Event s = e;
                    s.t = next;
                    push(std::move(s));
                }
                return;
            }
            case EventKind::Delivery: {
                TaskRuntime& task = tasks[e.index];
                ++result.received[task.label][e.data];
                auto slot = task.slots.find(e.data);
                if (slot == task.slots.end()) return;
                slot->second.window.push_back(e.value);
                while (slot->second.window.size() > slot->second.capacity) slot->second.window.pop_front();
                slot->second.last_scope = e.scope;
                bool ready = std::all_of(task.slots.begin(), task.slots.end(),
                                         [](const auto& s) { return s.second.ready(); });
                if (!ready) return;
                StepContext ctx;
                ctx.trigger = StepContext::Trigger::Input;
                ctx.trigger_data = e.data;
                ctx.trigger_scope = e.scope;
                step(e.index, std::move(ctx), e.t);
                return;
            }
            case EventKind::Response: {
                const TaskBinding& b = *tasks[e.index].binding;
                auto ep = std::find_if(b.request_endpoints.begin(), b.request_endpoints.end(),
                                       [&](const RequestEndpoint& r) { return r.data_name == e.data; });
                StepContext ctx;
                ctx.trigger = StepContext::Trigger::Response;
                ctx.trigger_data = e.data;
                ctx.trigger_scope = e.scope;
                ctx.response = lookup(ep->device, ep->storage, e.value);
                step(e.index, std::move(ctx), e.t);
                return;
            }
            case EventKind::Command:
                result.log.push_back(ActuationEntry{e.t, e.device, e.resource, e.action, e.args});
                return;
        }
    }

    std::optional<Value> lookup(const std::string& device, const std::string& storage, const Value& key) const {
        storage_driver(device, storage);
        auto it = storages.find({device, storage});
        if (it == storages.end()) return std::nullopt;
        auto v = it->second.find(value_to_text(key));
        if (v == it->second.end()) return std::nullopt;
        return v->second;
    }

    void enqueue_reading(std::size_t pkg, const std::string& resource, const std::string& data,
                         std::int64_t t, Value v, std::optional<Value> key) {
        if (t > cfg.horizon_ms) return;
        Event e;
        e.t = t;
        e.kind = EventKind::Reading;
        e.pkg = pkg;
        e.resource = resource;
        e.data = data;
        e.value = std::move(v);
        e.key = std::move(key);
        push(std::move(e));
    }

    void load_trace_entry(const TraceEntry& te) {
        auto where = [&] {
            std::string loc = te.span.file.empty() ? std::string("trace") : te.span.file;
            return loc + ":" + std::to_string(te.span.line) + ": ";
        };
        auto dev = device_index.find(te.device);
        if (dev == device_index.end()) throw SimError(where() + "unknown device '" + te.device + "'");
        const DriverContract* d = driver(dev->second, te.resource);
        if (!d) {
            throw SimError(where() + "device '" + te.device + "' does not host resource '" + te.resource + "'");
        }
        if (d->kind == ResourceKind::Actuator) {
            throw SimError(where() + "resource '" + te.resource + "' is an actuator and takes no readings");
        }
        auto item = std::find_if(d->data_items.begin(), d->data_items.end(),
                                 [&](const TypedName& t) { return t.name == te.data; });
        if (item == d->data_items.end()) {
            throw SimError(where() + "resource '" + te.resource + "' does not generate '" + te.data + "'");
        }
        std::string err;
        auto value = value_from_json(te.value, item->type, ls.records, &err);
        if (!value) {
            throw SimError(where() + "value of '" + te.data + "' on device '" + te.device +
                           "' does not match type " + item->type + ": " + err);
        }
        std::optional<Value> key;
        if (d->kind == ResourceKind::Storage) {
            if (!te.key) throw SimError(where() + "storage entry for '" + te.resource + "' needs a 'key'");
            key = value_from_json(*te.key, d->key_type, ls.records, &err);
            if (!key) {
                throw SimError(where() + "key for storage '" + te.resource + "' does not match type " +
                               d->key_type + ": " + err);
            }
        }
        enqueue_reading(dev->second, te.resource, te.data, te.t, std::move(*value), std::move(key));
    }
};

Simulator::Simulator(Linkset linkset, const HandlerRegistry& handlers, SimConfig config)
    : impl_(std::make_unique<Impl>()) {
    Impl& s = *impl_;
    s.ls = std::move(linkset);
    s.cfg = config;
    s.registry = &handlers;
    for (std::size_t p = 0; p < s.ls.packages.size(); ++p) {
        const DevicePackage& pkg = s.ls.packages[p];
        s.device_index[pkg.device] = p;
        for (const auto& d : pkg.drivers) {
            if (d.kind == ResourceKind::Storage) s.storages[{pkg.device, d.resource}];
            if (d.binding_key.rfind("extern:", 0) == 0 && !handlers.has_driver(d.binding_key.substr(7))) {
                throw SimError("missing driver '" + d.binding_key.substr(7) + "' for resource '" + d.resource +
                               "' on device '" + pkg.device + "'");
            }
        }
        for (const auto& b : pkg.tasks) {
            TaskRuntime t;
            t.pkg = p;
            t.binding = &b;
            t.label = b.instance.label();
            if (b.logic.kind == LogicBinding::Kind::Builtin) {
                try {
                    t.fn = make_builtin(b.logic.name, b.logic.params, b.contract);
                } catch (const std::invalid_argument& e) {
                    throw SimError("cannot instantiate " + t.label + ": " + e.what());
                }
            } else {
                if (!handlers.has_handler(b.logic.name)) {
                    throw SimError("missing handler '" + b.logic.name + "' for service '" + b.instance.service +
                                   "' on device '" + pkg.device + "'");
                }
                t.fn = handlers.instantiate(b.logic.name, b.contract);
            }
            for (const auto& in : b.contract.inputs) {
                SlotState slot;
                slot.capacity = in.window.value_or(1);
                t.slots[in.data_name] = slot;
            }
            s.tasks.push_back(std::move(t));
        }
    }
    for (std::size_t i = 0; i < s.tasks.size(); ++i) {
        for (const auto& topic : s.tasks[i].binding->input_topics) s.subscribers[topic].push_back(i);
    }
}

Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

void Simulator::storage_put(const std::string& device, const std::string& storage, const Value& key,
                            const Value& value) {
    const DriverContract& d = impl_->storage_driver(device, storage);
    if (!value_has_type(key, d.key_type, impl_->ls.records)) {
        throw SimError("key for storage '" + storage + "' must have type " + d.key_type);
    }
    if (!value_has_type(value, d.data_items.front().type, impl_->ls.records)) {
        throw SimError("value for storage '" + storage + "' must have type " + d.data_items.front().type);
    }
    impl_->storages[{device, storage}][value_to_text(key)] = value;
}

std::optional<Value> Simulator::storage_get(const std::string& device, const std::string& storage,
                                            const Value& key) const {
    return impl_->lookup(device, storage, key);
}

SimResult Simulator::run(const std::vector<SensorTrace>& traces) {
    Impl& s = *impl_;
    if (s.ran) throw SimError("a simulator runs only once");
    s.ran = true;
    for (const auto& trace : traces) {
        for (const auto& e : trace.entries) s.load_trace_entry(e);
    }
    for (std::size_t p = 0; p < s.ls.packages.size(); ++p) {
        const DevicePackage& pkg = s.ls.packages[p];
        for (const auto& d : pkg.drivers) {
            if (d.kind != ResourceKind::Sensor || d.binding_key.rfind("extern:", 0) != 0) continue;
            const DriverFunction& fn = s.registry->driver(d.binding_key.substr(7));
            for (const auto& item : d.data_items) {
                for (auto& r : fn(DriverQuery{pkg.device, d.resource, item.name, s.cfg.horizon_ms})) {
                    if (!value_has_type(r.value, item.type, s.ls.records)) {
                        throw SimError("driver for '" + d.resource + "' on device '" + pkg.device +
                                       "' produced '" + item.name + "' of the wrong type");
                    }
                    if (r.t >= 0) s.enqueue_reading(p, d.resource, item.name, r.t, r.value, std::nullopt);
                }
            }
        }
    }
    if (s.cfg.horizon_ms >= 0) {
        for (std::size_t p = 0; p < s.ls.packages.size(); ++p) {
            const auto& pubs = s.ls.packages[p].publications;
            for (std::size_t i = 0; i < pubs.size(); ++i) {
                if (pubs[i].delivery != Delivery::Periodic || !pubs[i].period_ms || *pubs[i].period_ms <= 0) continue;
                Event e;
                e.t = 0;
                e.kind = EventKind::Sample;
                e.pkg = p;
                e.index = i;
                s.push(std::move(e));
            }
        }
    }
    while (!s.queue.empty()) {
        Event e = s.queue.top();
        s.queue.pop();
        s.handle(e);
        ++s.result.events_processed;
    }
    for (const auto& t : s.tasks) {
        auto& state = s.result.final_states[t.label];
        for (const auto& [data, slot] : t.slots) state[data] = {slot.window.begin(), slot.window.end()};
    }
    return std::move(s.result);
}

SimResult simulate(const Linkset& linkset, const std::vector<SensorTrace>& traces,
                   const HandlerRegistry& handlers, const SimConfig& config) {
    Simulator sim(linkset, handlers, config);
    return sim.run(traces);
}

}  // namespace iotforge
