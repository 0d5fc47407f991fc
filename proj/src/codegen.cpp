#include "iotforge/codegen.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace iotforge {

using nlohmann::json;

std::string_view delivery_name(Delivery d) { return d == Delivery::Periodic ? "periodic" : "event"; }

std::string_view resource_kind_name(ResourceKind k) {
    switch (k) {
        case ResourceKind::Sensor: return "sensor";
        case ResourceKind::Actuator: return "actuator";
        case ResourceKind::Storage: return "storage";
    }
    return "sensor";
}

const InputSlot* LogicContract::input(std::string_view data) const {
    for (const auto& i : inputs) {
        if (i.data_name == data) return &i;
    }
    return nullptr;
}

const OutputSlot* LogicContract::output(std::string_view data) const {
    for (const auto& o : outputs) {
        if (o.data_name == data) return &o;
    }
    return nullptr;
}

const DevicePackage* Linkset::package(std::string_view device) const {
    for (const auto& p : packages) {
        if (p.device == device) return &p;
    }
    return nullptr;
}

LogicContract make_logic_contract(const ResolvedApp& r, const ServiceDecl& s) {
    LogicContract c;
    c.service = s.name;
    c.scope_region = s.scope;
    for (const auto& cl : s.consumes) {
        InputSlot in;
        in.data_name = cl.data_name;
        const DataInfo* info = r.data(cl.data_name);
        if (info) {
            in.data_type = info->type;
            in.origin = info->origin;
        }
        in.delivery = cl.period_ms ? Delivery::Periodic : Delivery::Event;
        in.window = cl.window;
        in.period_ms = cl.period_ms;
        c.inputs.push_back(in);
    }
    for (const auto& p : s.produces) c.outputs.push_back(OutputSlot{p.name, p.type});
    for (const auto& q : s.requests) {
        RequestSlot slot;
        slot.data_name = q.data_name;
        slot.key_arg = q.key_arg;
        slot.storage = q.storage_name;
        if (const StorageDecl* st = r.vocabulary.find_storage(q.storage_name)) {
            slot.data_type = st->data_type;
            slot.key_type = st->key_type;
        }
        c.requests.push_back(slot);
    }
    for (const auto& cmd : s.commands) {
        CommandSlot slot;
        slot.action = cmd.action_name;
        slot.actuator = cmd.actuator_name;
        slot.args = cmd.args;
        if (const ActuatorDecl* act = r.vocabulary.find_actuator(cmd.actuator_name)) {
            for (const auto& a : act->actions) {
                if (a.name != cmd.action_name) continue;
                for (const auto& p : a.params) slot.arg_types.push_back(p.type);
            }
        }
        c.commands.push_back(slot);
    }
    return c;
}

std::vector<LogicContract> generate_architecture_framework(const ResolvedApp& r) {
    std::vector<LogicContract> out;
    for (const auto& s : r.architecture.services) out.push_back(make_logic_contract(r, s));
    return out;
}

std::vector<DriverContract> generate_vocabulary_framework(const VocabularySpec& v,
                                                          const DriverManifest* drivers) {
    auto key_for = [&](const std::string& res) {
        const DriverBinding* b = drivers ? drivers->find(res) : nullptr;
        if (b && b->is_extern) return "extern:" + b->extern_key;
        return "trace:" + res;
    };
    std::vector<DriverContract> out;
    for (const auto& s : v.sensors) {
        DriverContract d;
        d.resource = s.name;
        d.kind = ResourceKind::Sensor;
        d.data_items = s.generates;
        d.binding_key = key_for(s.name);
        out.push_back(d);
    }
    for (const auto& a : v.actuators) {
        DriverContract d;
        d.resource = a.name;
        d.kind = ResourceKind::Actuator;
        d.actions = a.actions;
        d.binding_key = key_for(a.name);
        out.push_back(d);
    }
    for (const auto& st : v.storages) {
        DriverContract d;
        d.resource = st.name;
        d.kind = ResourceKind::Storage;
        d.data_items.push_back(TypedName{st.data_name, st.data_type, st.span});
        d.key_name = st.key_name;
        d.key_type = st.key_type;
        d.binding_key = key_for(st.name);
        out.push_back(d);
    }
    return out;
}

namespace {

/// How consumers collect a sensor data item; consistent across consumers
/// after resolution.
std::optional<std::int64_t> collection_period(const ResolvedApp& r, const std::string& data) {
    for (const auto& s : r.architecture.services) {
        for (const auto& c : s.consumes) {
            if (c.data_name == data) return c.period_ms;
        }
    }
    return std::nullopt;
}

std::string pick_storage_device(const ResolvedApp& r, const ServiceInstance& inst,
                                const std::string& storage) {
    const DeviceDecl* fallback = nullptr;
    for (const auto& dev : r.deployment.devices) {
        if (!dev.hosts(storage)) continue;
        if (!inst.is_global() && dev.coord(inst.region) == inst.value) return dev.name;
        if (!fallback) fallback = &dev;
    }
    return fallback ? fallback->name : std::string();
}

}  // namespace

Outcome<Linkset> link(const ResolvedApp& r, const Mapping& m, const DriverManifest* drivers) {
    std::vector<Diagnostic> errors;
    Linkset ls;
    ls.app = r.architecture.name;
    ls.records = r.vocabulary.records;
    ls.topics = r.topics;

    auto framework = generate_vocabulary_framework(r.vocabulary, drivers);
    std::map<std::string, LogicContract> contracts;
    for (const auto& s : r.architecture.services) contracts[s.name] = make_logic_contract(r, s);

    for (const auto& inst : r.instances) {
        const std::string* dev = m.device_for(inst);
        if (!dev || !r.deployment.find_device(*dev)) {
            errors.push_back(Diagnostic{{}, Severity::Error,
                                        "internal: " + inst.label() + " has no valid assignment"});
        }
    }
    if (!errors.empty()) return errors;

    for (const auto& dev : r.deployment.devices) {
        DevicePackage p;
        p.device = dev.name;
        p.platform = dev.platform;
        p.coords = dev.coords;
        for (const auto& d : framework) {
            if (dev.hosts(d.resource)) p.drivers.push_back(d);
        }
        for (const auto& s : r.vocabulary.sensors) {
            if (!dev.hosts(s.name)) continue;
            for (const auto& g : s.generates) {
                Publication pub;
                pub.resource = s.name;
                pub.data_name = g.name;
                pub.data_type = g.type;
                pub.period_ms = collection_period(r, g.name);
                pub.delivery = pub.period_ms ? Delivery::Periodic : Delivery::Event;
                for (const auto& t : r.topics) {
                    for (const auto& src : t.publishers) {
                        if (src.kind == Publisher::Kind::Sensor && src.device == dev.name &&
                            src.resource == s.name && t.data_name == g.name) {
                            pub.topics.push_back(t.topic);
                        }
                    }
                }
                if (!pub.topics.empty()) p.publications.push_back(pub);
            }
        }
        for (const auto& a : m.assignments) {
            if (a.device != dev.name) continue;
            const ServiceDecl* s = r.architecture.find_service(a.instance.service);
            TaskBinding t;
            t.instance = a.instance;
            t.logic.kind = s->logic.kind;
            t.logic.name = s->logic.kind == LogicBinding::Kind::Builtin ? s->logic.builtin_name
                                                                         : s->logic.handler_key;
            t.logic.params = s->logic.builtin_params;
            t.contract = contracts[s->name];
            for (const auto& topic : r.topics) {
                if (std::find(topic.subscribers.begin(), topic.subscribers.end(), a.instance) !=
                    topic.subscribers.end()) {
                    t.input_topics.push_back(topic.topic);
                }
                for (const auto& src : topic.publishers) {
                    if (src.kind == Publisher::Kind::Task && src.instance == a.instance) {
                        t.output_topics.push_back(topic.topic);
                    }
                }
            }
            for (const auto& in : t.contract.inputs) {
                if (in.period_ms) t.timers.push_back(TimerSpec{*in.period_ms, in.data_name});
            }
            for (const auto& q : t.contract.requests) {
                t.request_endpoints.push_back(
                    RequestEndpoint{q.data_name, q.storage, pick_storage_device(r, a.instance, q.storage)});
            }
            for (const auto& c : t.contract.commands) {
                for (const auto& target : r.deployment.devices) {
                    if (!target.hosts(c.actuator)) continue;
                    if (!a.instance.is_global() && target.coord(a.instance.region) != a.instance.value) {
                        continue;
                    }
                    t.command_targets.push_back(CommandTarget{c.action, c.actuator, target.name, target.coords});
                }
            }
            p.tasks.push_back(std::move(t));
        }
        ls.packages.push_back(std::move(p));
    }

    for (const auto& v : closure_violations(ls)) {
        errors.push_back(Diagnostic{{}, Severity::Error, "internal: link closure violated: " + v});
    }
    if (!errors.empty()) return errors;
    return ls;
}

std::vector<std::string> closure_violations(const Linkset& ls) {
    std::set<std::string> published;
    for (const auto& p : ls.packages) {
        for (const auto& pub : p.publications) published.insert(pub.topics.begin(), pub.topics.end());
        for (const auto& t : p.tasks) published.insert(t.output_topics.begin(), t.output_topics.end());
    }
    std::vector<std::string> out;
    for (const auto& p : ls.packages) {
        for (const auto& t : p.tasks) {
            for (const auto& topic : t.input_topics) {
                if (!published.count(topic)) {
                    out.push_back("topic '" + topic + "' subscribed by " + t.instance.label() +
                                  " on " + p.device + " has no publisher");
                }
            }
        }
    }
    return out;
}

// ------------------------------------------------------------ serialization

namespace {

json typed_list(const std::vector<TypedName>& items) {
    json out = json::array();
    for (const auto& t : items) out.push_back({{"name", t.name}, {"type", t.type}});
    return out;
}

std::vector<TypedName> typed_list_from(const json& j) {
    std::vector<TypedName> out;
    for (const auto& e : j) out.push_back(TypedName{e.at("name"), e.at("type"), {}});
    return out;
}

json optional_json(const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); }

json coords_json(const std::vector<RegionCoord>& coords) {
    json out = json::array();
    for (const auto& c : coords) out.push_back({{"region", c.region}, {"value", c.value}});
    return out;
}

std::vector<RegionCoord> coords_from(const json& j) {
    std::vector<RegionCoord> out;
    for (const auto& c : j) out.push_back(RegionCoord{c.at("region"), c.at("value"), {}});
    return out;
}

DataOrigin origin_from(const std::string& s) {
    if (s == "service") return DataOrigin::Service;
    if (s == "storage") return DataOrigin::Storage;
    return DataOrigin::Sensor;
}

ResourceKind kind_from(const std::string& s) {
    if (s == "actuator") return ResourceKind::Actuator;
    if (s == "storage") return ResourceKind::Storage;
    return ResourceKind::Sensor;
}

LogicContract contract_from(const json& j) {
    LogicContract c;
    c.service = j.at("service");
    c.scope_region = j.at("scope");
    for (const auto& e : j.at("inputs")) {
        InputSlot in;
        in.data_name = e.at("data");
        in.data_type = e.at("type");
        in.delivery = e.at("delivery") == "periodic" ? Delivery::Periodic : Delivery::Event;
        if (!e.at("window").is_null()) in.window = e.at("window").get<std::uint32_t>();
        if (!e.at("period_ms").is_null()) in.period_ms = e.at("period_ms").get<std::int64_t>();
        in.origin = origin_from(e.at("origin"));
        c.inputs.push_back(in);
    }
    for (const auto& e : j.at("outputs")) c.outputs.push_back(OutputSlot{e.at("data"), e.at("type")});
    for (const auto& e : j.at("requests")) {
        c.requests.push_back(RequestSlot{e.at("data"), e.at("type"), e.at("key"), e.at("key_type"),
                                         e.at("storage")});
    }
    for (const auto& e : j.at("commands")) {
        c.commands.push_back(CommandSlot{e.at("action"), e.at("actuator"),
                                         e.at("args").get<std::vector<std::string>>(),
                                         e.at("arg_types").get<std::vector<std::string>>()});
    }
    return c;
}

DriverContract driver_from(const json& j) {
    DriverContract d;
    d.resource = j.at("resource");
    d.kind = kind_from(j.at("kind"));
    d.data_items = typed_list_from(j.at("data"));
    for (const auto& a : j.at("actions")) {
        d.actions.push_back(ActionDecl{a.at("name"), typed_list_from(a.at("params")), {}});
    }
    d.key_name = j.at("key_name");
    d.key_type = j.at("key_type");
    d.binding_key = j.at("binding");
    return d;
}

Publisher publisher_from_label(const std::string& label) {
    Publisher p;
    auto at = label.find('@');
    if (at == std::string::npos) {
        auto slash = label.find('/');
        p.kind = Publisher::Kind::Sensor;
        p.device = label.substr(0, slash);
        p.resource = slash == std::string::npos ? "" : label.substr(slash + 1);
        return p;
    }
    p.kind = Publisher::Kind::Task;
    p.instance = instance_from_label(label);
    return p;
}

}  // namespace

ServiceInstance instance_from_label(const std::string& label) {
    ServiceInstance i;
    auto at = label.find('@');
    i.service = label.substr(0, at);
    std::string scope = at == std::string::npos ? "global" : label.substr(at + 1);
    auto eq = scope.find('=');
    if (eq != std::string::npos) {
        i.region = scope.substr(0, eq);
        i.value = std::stoll(scope.substr(eq + 1));
    }
    return i;
}

json param_to_json(const ParamValue& p) {
    switch (p.kind) {
        case ParamValue::Kind::Integer: return {{"kind", "integer"}, {"value", p.integer}};
        case ParamValue::Kind::Real: return {{"kind", "real"}, {"value", p.real}};
        case ParamValue::Kind::String: return {{"kind", "string"}, {"value", p.text}};
        case ParamValue::Kind::Boolean: return {{"kind", "boolean"}, {"value", p.boolean}};
        case ParamValue::Kind::Ident: return {{"kind", "ident"}, {"value", p.text}};
    }
    return nullptr;
}

ParamValue param_from_json(const json& j) {
    ParamValue p;
    const std::string kind = j.at("kind");
    const json& v = j.at("value");
    if (kind == "integer") {
        p.kind = ParamValue::Kind::Integer;
        p.integer = v.get<std::int64_t>();
    } else if (kind == "real") {
        p.kind = ParamValue::Kind::Real;
        p.real = v.get<double>();
    } else if (kind == "string") {
        p.kind = ParamValue::Kind::String;
        p.text = v.get<std::string>();
    } else if (kind == "boolean") {
        p.kind = ParamValue::Kind::Boolean;
        p.boolean = v.get<bool>();
    } else if (kind == "ident") {
        p.kind = ParamValue::Kind::Ident;
        p.text = v.get<std::string>();
    } else {
        throw std::invalid_argument("unknown parameter kind '" + kind + "'");
    }
    return p;
}

json instance_to_json(const ServiceInstance& i) {
    return {{"service", i.service},
            {"region", i.region},
            {"value", i.value ? json(*i.value) : json(nullptr)},
            {"scope", i.scope_label()}};
}

ServiceInstance instance_from_json(const json& j) {
    ServiceInstance i;
    i.service = j.at("service");
    i.region = j.at("region");
    if (!j.at("value").is_null()) i.value = j.at("value").get<std::int64_t>();
    return i;
}

json contract_to_json(const LogicContract& c) {
    json inputs = json::array();
    for (const auto& in : c.inputs) {
        inputs.push_back({{"data", in.data_name},
                          {"type", in.data_type},
                          {"delivery", delivery_name(in.delivery)},
                          {"window", in.window ? json(*in.window) : json(nullptr)},
                          {"period_ms", optional_json(in.period_ms)},
                          {"origin", origin_name(in.origin)}});
    }
    json outputs = json::array();
    for (const auto& o : c.outputs) outputs.push_back({{"data", o.data_name}, {"type", o.data_type}});
    json requests = json::array();
    for (const auto& q : c.requests) {
        requests.push_back({{"data", q.data_name},
                            {"type", q.data_type},
                            {"key", q.key_arg},
                            {"key_type", q.key_type},
                            {"storage", q.storage}});
    }
    json commands = json::array();
    for (const auto& cmd : c.commands) {
        commands.push_back({{"action", cmd.action},
                            {"actuator", cmd.actuator},
                            {"args", cmd.args},
                            {"arg_types", cmd.arg_types}});
    }
    return {{"service", c.service},
            {"scope", c.scope_region},
            {"inputs", inputs},
            {"outputs", outputs},
            {"requests", requests},
            {"commands", commands}};
}

json driver_to_json(const DriverContract& d) {
    json actions = json::array();
    for (const auto& a : d.actions) actions.push_back({{"name", a.name}, {"params", typed_list(a.params)}});
    return {{"resource", d.resource},
            {"kind", resource_kind_name(d.kind)},
            {"data", typed_list(d.data_items)},
            {"actions", actions},
            {"key_name", d.key_name},
            {"key_type", d.key_type},
            {"binding", d.binding_key}};
}

json package_to_json_value(const DevicePackage& p) {
    json tasks = json::array();
    for (const auto& t : p.tasks) {
        json params = json::array();
        for (const auto& lp : t.logic.params) {
            params.push_back({{"key", lp.key}, {"value", param_to_json(lp.value)}});
        }
        json timers = json::array();
        for (const auto& tm : t.timers) timers.push_back({{"period_ms", tm.period_ms}, {"data", tm.data_name}});
        json endpoints = json::array();
        for (const auto& e : t.request_endpoints) {
            endpoints.push_back({{"data", e.data_name}, {"storage", e.storage}, {"device", e.device}});
        }
        json targets = json::array();
        for (const auto& c : t.command_targets) {
            targets.push_back({{"action", c.action},
                               {"actuator", c.actuator},
                               {"device", c.device},
                               {"coords", coords_json(c.coords)}});
        }
        tasks.push_back({{"instance", instance_to_json(t.instance)},
                         {"logic",
                          {{"kind", t.logic.kind == LogicBinding::Kind::Builtin ? "builtin" : "extern"},
                           {"name", t.logic.name},
                           {"params", params}}},
                         {"contract", contract_to_json(t.contract)},
                         {"input_topics", t.input_topics},
                         {"output_topics", t.output_topics},
                         {"timers", timers},
                         {"request_endpoints", endpoints},
                         {"command_targets", targets}});
    }
    json drivers = json::array();
    for (const auto& d : p.drivers) drivers.push_back(driver_to_json(d));
    json pubs = json::array();
    for (const auto& pub : p.publications) {
        pubs.push_back({{"resource", pub.resource},
                        {"data", pub.data_name},
                        {"type", pub.data_type},
                        {"delivery", delivery_name(pub.delivery)},
                        {"period_ms", optional_json(pub.period_ms)},
                        {"topics", pub.topics}});
    }
    return {{"device", p.device},
            {"platform", p.platform},
            {"coords", coords_json(p.coords)},
            {"tasks", tasks},
            {"drivers", drivers},
            {"publications", pubs},
            {"runtime", {{"broker", p.runtime.broker}, {"qos", p.runtime.qos}}}};
}

std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

std::string package_to_json(const DevicePackage& p) { return canonical_dump(package_to_json_value(p)); }

std::string contracts_to_json(const std::vector<LogicContract>& cs) {
    json arr = json::array();
    for (const auto& c : cs) arr.push_back(contract_to_json(c));
    return canonical_dump({{"contracts", arr}});
}

std::string drivers_to_json(const std::vector<DriverContract>& ds) {
    json arr = json::array();
    for (const auto& d : ds) arr.push_back(driver_to_json(d));
    return canonical_dump({{"drivers", arr}});
}

std::string linkset_index_to_json(const Linkset& ls) {
    json packages = json::array();
    for (const auto& p : ls.packages) {
        packages.push_back({{"device", p.device},
                            {"file", "device/" + p.device + ".pkg.json"},
                            {"bytes", package_size(p)}});
    }
    json records = json::array();
    for (const auto& r : ls.records) records.push_back({{"name", r.name}, {"fields", typed_list(r.fields)}});
    json topics = json::array();
    for (const auto& t : ls.topics) {
        json pubs = json::array();
        for (const auto& p : t.publishers) pubs.push_back(p.label());
        json subs = json::array();
        for (const auto& s : t.subscribers) subs.push_back(s.label());
        topics.push_back({{"topic", t.topic},
                          {"data", t.data_name},
                          {"scope", t.scope_path},
                          {"publishers", pubs},
                          {"subscribers", subs}});
    }
    return canonical_dump({{"app", ls.app}, {"packages", packages}, {"records", records}, {"topics", topics}});
}

DevicePackage package_from_json(const json& j) {
    DevicePackage p;
    p.device = j.at("device");
    p.platform = j.at("platform");
    p.coords = coords_from(j.at("coords"));
    for (const auto& t : j.at("tasks")) {
        TaskBinding b;
        b.instance = instance_from_json(t.at("instance"));
        const json& logic = t.at("logic");
        b.logic.kind = logic.at("kind") == "extern" ? LogicBinding::Kind::Extern : LogicBinding::Kind::Builtin;
        b.logic.name = logic.at("name");
        for (const auto& lp : logic.at("params")) {
            b.logic.params.push_back(LogicParam{lp.at("key"), param_from_json(lp.at("value")), {}});
        }
        b.contract = contract_from(t.at("contract"));
        b.input_topics = t.at("input_topics").get<std::vector<std::string>>();
        b.output_topics = t.at("output_topics").get<std::vector<std::string>>();
        for (const auto& tm : t.at("timers")) b.timers.push_back(TimerSpec{tm.at("period_ms"), tm.at("data")});
        for (const auto& e : t.at("request_endpoints")) {
            b.request_endpoints.push_back(RequestEndpoint{e.at("data"), e.at("storage"), e.at("device")});
        }
        for (const auto& c : t.at("command_targets")) {
            b.command_targets.push_back(
                CommandTarget{c.at("action"), c.at("actuator"), c.at("device"), coords_from(c.at("coords"))});
        }
        p.tasks.push_back(std::move(b));
    }
    for (const auto& d : j.at("drivers")) p.drivers.push_back(driver_from(d));
    for (const auto& e : j.at("publications")) {
        Publication pub;
        pub.resource = e.at("resource");
        pub.data_name = e.at("data");
        pub.data_type = e.at("type");
        pub.delivery = e.at("delivery") == "periodic" ? Delivery::Periodic : Delivery::Event;
        if (!e.at("period_ms").is_null()) pub.period_ms = e.at("period_ms").get<std::int64_t>();
        pub.topics = e.at("topics").get<std::vector<std::string>>();
        p.publications.push_back(pub);
    }
    p.runtime.broker = j.at("runtime").at("broker");
    p.runtime.qos = j.at("runtime").at("qos");
    return p;
}

Linkset linkset_from_json(const json& index, const std::vector<json>& packages) {
    Linkset ls;
    ls.app = index.at("app");
    for (const auto& r : index.at("records")) {
        ls.records.push_back(RecordDecl{r.at("name"), typed_list_from(r.at("fields")), {}});
    }
    for (const auto& t : index.at("topics")) {
        TopicBinding b;
        b.topic = t.at("topic");
        b.data_name = t.at("data");
        b.scope_path = t.at("scope");
        for (const auto& p : t.at("publishers")) b.publishers.push_back(publisher_from_label(p));
        for (const auto& s : t.at("subscribers")) b.subscribers.push_back(instance_from_label(s));
        ls.topics.push_back(std::move(b));
    }
    for (const auto& p : packages) ls.packages.push_back(package_from_json(p));
    return ls;
}

std::size_t package_size(const DevicePackage& p) { return package_to_json(p).size(); }

}  // namespace iotforge
