#include "iotforge/resolver.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <tuple>
#include <unordered_map>

#include "iotforge/builtins.hpp"
#include "iotforge/codegen.hpp"

namespace iotforge {

std::string_view origin_name(DataOrigin o) {
    switch (o) {
        case DataOrigin::Sensor: return "sensor";
        case DataOrigin::Service: return "service";
        case DataOrigin::Storage: return "storage";
    }
    return "sensor";
}

std::string ServiceInstance::scope_label() const {
    return value ? region + "=" + std::to_string(*value) : std::string("global");
}

std::string ServiceInstance::label() const { return service + "@" + scope_label(); }

std::string Publisher::label() const {
    return kind == Kind::Sensor ? device + "/" + resource : instance.label();
}

const DataInfo* ResolvedApp::data(std::string_view name) const {
    auto it = data_index.find(std::string(name));
    return it == data_index.end() ? nullptr : &it->second;
}

const TopicBinding* ResolvedApp::topic(std::string_view text) const {
    for (const auto& t : topics) {
        if (t.topic == text) return &t;
    }
    return nullptr;
}

std::string make_topic(std::string_view data_name, const ServiceInstance& scope) {
    return std::string(data_name) + "/" + scope.scope_label();
}

namespace {

/// Services ordered so every producer precedes its consumers. Services on a
/// cycle are omitted and reported through `cycles`.
std::vector<const ServiceDecl*> dependency_order(const ResolvedApp& r,
                                                 std::vector<const ServiceDecl*>* cycles) {
    const auto& services = r.architecture.services;
    std::unordered_map<std::string, int> state;  // 0 new, 1 visiting, 2 done, 3 cyclic
    std::vector<const ServiceDecl*> order;
    std::function<bool(const ServiceDecl&)> visit = [&](const ServiceDecl& s) -> bool {
        int& st = state[s.name];
        if (st == 2) return true;
        if (st == 1 || st == 3) return false;
        st = 1;
        bool ok = true;
        for (const auto& c : s.consumes) {
            const DataInfo* info = r.data(c.data_name);
            if (!info || info->origin != DataOrigin::Service) continue;
            const ServiceDecl* up = r.architecture.find_service(info->owner);
            if (up && !visit(*up)) ok = false;
        }
        state[s.name] = ok ? 2 : 3;
        if (ok) {
            order.push_back(&s);
        } else if (cycles) {
            cycles->push_back(&s);
        }
        return ok;
    };
    for (const auto& s : services) visit(s);
    return order;
}

void add_publisher(TopicBinding& t, Publisher p) {
    if (std::find(t.publishers.begin(), t.publishers.end(), p) == t.publishers.end()) {
        t.publishers.push_back(std::move(p));
    }
}

void add_subscriber(TopicBinding& t, const ServiceInstance& inst) {
    if (std::find(t.subscribers.begin(), t.subscribers.end(), inst) == t.subscribers.end()) {
        t.subscribers.push_back(inst);
    }
}

}  // namespace

std::vector<ServiceInstance> instantiate_services(const ResolvedApp& r,
                                                  std::vector<Diagnostic>* warnings) {
    std::unordered_map<std::string, std::vector<ServiceInstance>> by_service;
    for (const ServiceDecl* s : dependency_order(r, nullptr)) {
        std::set<std::int64_t> values;
        bool has_sensor_input = false;
        bool has_upstream_instance = false;
        for (const auto& c : s->consumes) {
            const DataInfo* info = r.data(c.data_name);
            if (!info) continue;
            if (info->origin == DataOrigin::Sensor) {
                has_sensor_input = true;
                for (const auto& dev : r.deployment.devices) {
                    auto v = dev.coord(s->scope);
                    if (v && dev.hosts(info->owner)) values.insert(*v);
                }
            } else if (info->origin == DataOrigin::Service) {
                for (const auto& up : by_service[info->owner]) {
                    has_upstream_instance = true;
                    if (!up.is_global() && up.region == s->scope) values.insert(*up.value);
                }
            }
        }
        auto& out = by_service[s->name];
        for (auto v : values) out.push_back(ServiceInstance{s->name, s->scope, v});
        if (values.empty() && !has_sensor_input && has_upstream_instance) {
            out.push_back(ServiceInstance{s->name, s->scope, std::nullopt});
        }
        if (out.empty() && warnings) {
            warnings->push_back(Diagnostic{s->span, Severity::Warning,
                                           "service '" + s->name +
                                               "' has no instances: no deployed producer binds "
                                               "region '" + s->scope + "'"});
        }
    }
    std::vector<ServiceInstance> result;
    for (const auto& s : r.architecture.services) {
        auto it = by_service.find(s.name);
        if (it != by_service.end()) {
            result.insert(result.end(), it->second.begin(), it->second.end());
        }
    }
    return result;
}

std::vector<TopicBinding> build_topics(const ResolvedApp& r) {
    using Key = std::tuple<std::string, bool, std::string, std::int64_t>;
    std::map<Key, TopicBinding> topics;
    auto binding = [&](const std::string& data, const ServiceInstance& scope) -> TopicBinding& {
        Key key{data, scope.is_global(), scope.region, scope.value.value_or(0)};
        auto [it, inserted] = topics.try_emplace(key);
        if (inserted) {
            it->second.topic = make_topic(data, scope);
            it->second.data_name = data;
            it->second.scope_path = scope.scope_label();
        }
        return it->second;
    };
    auto instances_of = [&](const std::string& service) {
        std::vector<ServiceInstance> out;
        for (const auto& i : r.instances) {
            if (i.service == service) out.push_back(i);
        }
        return out;
    };

    // Producer side first so topics exist even without subscribers.
    for (const auto& inst : r.instances) {
        const ServiceDecl* s = r.architecture.find_service(inst.service);
        for (const auto& p : s->produces) {
            Publisher pub;
            pub.kind = Publisher::Kind::Task;
            pub.instance = inst;
            add_publisher(binding(p.name, inst), pub);
        }
    }

    for (const auto& s : r.architecture.services) {
        for (const auto& c : s.consumes) {
            const DataInfo* info = r.data(c.data_name);
            if (!info) continue;
            for (const auto& inst : instances_of(s.name)) {
                if (info->origin == DataOrigin::Sensor) {
                    if (inst.is_global()) continue;
                    TopicBinding& t = binding(c.data_name, inst);
                    for (const auto& dev : r.deployment.devices) {
                        if (dev.hosts(info->owner) && dev.coord(inst.region) == inst.value) {
                            Publisher pub;
                            pub.kind = Publisher::Kind::Sensor;
                            pub.device = dev.name;
                            pub.resource = info->owner;
                            add_publisher(t, pub);
                        }
                    }
                    add_subscriber(t, inst);
                } else if (info->origin == DataOrigin::Service) {
                    for (const auto& up : instances_of(info->owner)) {
                        bool match = inst.is_global() || up.is_global() ||
                                     (up.region == inst.region && up.value == inst.value);
                        if (match) add_subscriber(binding(c.data_name, up), inst);
                    }
                }
            }
        }
    }

    std::vector<TopicBinding> out;
    for (auto& [key, t] : topics) out.push_back(std::move(t));
    return out;
}

Outcome<ResolvedApp> resolve(const VocabularySpec& v, const ArchitectureSpec& a,
                             const DeploymentSpec& d) {
    std::vector<Diagnostic> errs;
    auto error = [&](const SourceSpan& span, std::string msg) {
        errs.push_back(Diagnostic{span, Severity::Error, std::move(msg)});
    };
    ResolvedApp r;
    r.vocabulary = v;
    r.architecture = a;
    r.deployment = d;

    if (a.vocabulary_name != v.name) {
        error(a.vocabulary_span, "architecture uses vocabulary '" + a.vocabulary_name +
                                     "' but the vocabulary is named '" + v.name + "'");
    }
    if (d.vocabulary_name != v.name) {
        error(d.vocabulary_span, "deployment uses vocabulary '" + d.vocabulary_name +
                                     "' but the vocabulary is named '" + v.name + "'");
    }

    for (const auto& s : v.sensors) {
        for (const auto& g : s.generates) {
            r.data_index[g.name] = DataInfo{g.name, g.type, DataOrigin::Sensor, s.name};
        }
    }
    for (const auto& s : v.storages) {
        r.data_index[s.data_name] = DataInfo{s.data_name, s.data_type, DataOrigin::Storage, s.name};
    }
    std::set<std::string> record_names;
    for (const auto& rec : v.records) record_names.insert(rec.name);
    for (const auto& s : a.services) {
        for (const auto& p : s.produces) {
            if (!is_primitive_type(p.type) && !record_names.count(p.type)) {
                error(p.span, "unknown type '" + p.type + "'");
            }
            auto it = r.data_index.find(p.name);
            if (it != r.data_index.end() && it->second.origin != DataOrigin::Service) {
                error(p.span, "produced data '" + p.name + "' collides with " +
                                  std::string(origin_name(it->second.origin)) + " data of '" +
                                  it->second.owner + "'");
                continue;
            }
            r.data_index[p.name] = DataInfo{p.name, p.type, DataOrigin::Service, s.name};
        }
    }

    // Sensor data must be collected the same way by every consumer.
    std::unordered_map<std::string, const ConsumeClause*> first_collection;

    for (const auto& s : a.services) {
        if (!v.has_region(s.scope)) {
            error(s.scope_span, "unknown region '" + s.scope + "' in scope of service '" + s.name + "'");
        }
        if (s.consumes.empty()) error(s.span, "service '" + s.name + "' consumes no data");
        std::set<std::string> consumed;
        std::set<std::string> produced;
        for (const auto& p : s.produces) produced.insert(p.name);
        for (const auto& c : s.consumes) {
            consumed.insert(c.data_name);
            const DataInfo* info = r.data(c.data_name);
            if (!info) {
                error(c.span, "unknown data name '" + c.data_name +
                                  "': no sensor generates it and no service produces it");
                continue;
            }
            if (info->origin == DataOrigin::Storage) {
                error(c.span, "'" + c.data_name + "' is held by storage '" + info->owner +
                                  "' and must be requested, not consumed");
                continue;
            }
            if (info->origin == DataOrigin::Service && c.period_ms) {
                error(c.span, "periodic collection applies to sensor data; '" + c.data_name +
                                  "' is produced by service '" + info->owner + "'");
            }
            if (info->origin == DataOrigin::Sensor) {
                auto [it, inserted] = first_collection.emplace(c.data_name, &c);
                if (!inserted && it->second->period_ms != c.period_ms) {
                    error(c.span, "'" + c.data_name +
                                      "' is collected differently by another service (period "
                                      "must match every consumer)");
                }
            }
        }
        for (const auto& q : s.requests) {
            const StorageDecl* st = v.find_storage(q.storage_name);
            if (!st) {
                error(q.span, "unknown storage '" + q.storage_name + "'");
                continue;
            }
            if (st->data_name != q.data_name) {
                error(q.span, "storage '" + st->name + "' holds '" + st->data_name + "', not '" +
                                  q.data_name + "'");
            }
            if (!consumed.count(q.key_arg)) {
                error(q.span, "request key '" + q.key_arg + "' is not consumed by service '" +
                                  s.name + "'");
                continue;
            }
            const DataInfo* key = r.data(q.key_arg);
            if (key && key->type != st->key_type) {
                error(q.span, "request key '" + q.key_arg + "' has type " + key->type +
                                  " but storage '" + st->name + "' is keyed by " + st->key_type);
            }
        }
        for (const auto& c : s.commands) {
            const ActuatorDecl* act = v.find_actuator(c.actuator_name);
            if (!act) {
                error(c.span, "unknown actuator '" + c.actuator_name + "'");
                continue;
            }
            auto ait = std::find_if(act->actions.begin(), act->actions.end(),
                                    [&](const ActionDecl& x) { return x.name == c.action_name; });
            if (ait == act->actions.end()) {
                error(c.span, "actuator '" + act->name + "' has no action '" + c.action_name + "'");
                continue;
            }
            if (ait->params.size() != c.args.size()) {
                error(c.span, "action '" + c.action_name + "' takes " +
                                  std::to_string(ait->params.size()) + " argument(s), " +
                                  std::to_string(c.args.size()) + " given");
                continue;
            }
            for (std::size_t i = 0; i < c.args.size(); ++i) {
                const std::string& arg = c.args[i];
                if (!consumed.count(arg) && !produced.count(arg)) {
                    error(c.span, "command argument '" + arg +
                                      "' is neither consumed nor produced by service '" + s.name + "'");
                    continue;
                }
                const DataInfo* info = r.data(arg);
                if (info && info->type != ait->params[i].type) {
                    error(c.span, "command argument '" + arg + "' has type " + info->type +
                                      " but parameter '" + ait->params[i].name + "' expects " +
                                      ait->params[i].type);
                }
            }
        }
        if (s.logic.kind == LogicBinding::Kind::Builtin && !is_builtin(s.logic.builtin_name)) {
            error(s.logic.span, "unknown builtin '" + s.logic.builtin_name + "'");
        }
    }

    for (const auto& dev : d.devices) {
        for (const auto& c : dev.coords) {
            if (!v.has_region(c.region)) {
                error(c.span, "unknown region '" + c.region + "' in device '" + dev.name + "'");
            }
        }
        for (std::size_t i = 0; i < dev.resources.size(); ++i) {
            const auto& res = dev.resources[i];
            if (!v.find_sensor(res) && !v.find_actuator(res) && !v.find_storage(res)) {
                error(dev.resource_spans[i], "resource '" + res + "' of device '" + dev.name +
                                                 "' is not declared in vocabulary '" + v.name + "'");
            }
        }
    }

    if (!errs.empty()) {
        sort_diagnostics(errs);
        return errs;
    }

    std::vector<const ServiceDecl*> cyclic;
    dependency_order(r, &cyclic);
    for (const ServiceDecl* s : cyclic) {
        error(s->span, "service '" + s->name + "' depends on its own output (cyclic data flow)");
    }
    if (!errs.empty()) {
        sort_diagnostics(errs);
        return errs;
    }

    r.instances = instantiate_services(r, &r.warnings);

    for (const auto& s : a.services) {
        bool has_instances = false;
        bool global = false;
        for (const auto& i : r.instances) {
            if (i.service == s.name) {
                has_instances = true;
                global = global || i.is_global();
            }
        }
        if (!has_instances) continue;
        for (const auto& c : s.consumes) {
            const DataInfo* info = r.data(c.data_name);
            if (global || info->origin != DataOrigin::Service) continue;
            const ServiceDecl* up = a.find_service(info->owner);
            bool up_scoped = std::any_of(r.instances.begin(), r.instances.end(),
                                         [&](const ServiceInstance& i) {
                                             return i.service == up->name && !i.is_global();
                                         });
            if (up_scoped && up->scope != s.scope) {
                error(c.span, "service '" + s.name + "' (scope " + s.scope + ") consumes '" +
                                  c.data_name + "', which '" + up->name + "' produces per " +
                                  up->scope + "; only globally expanded services may consume "
                                  "across scopes");
            }
        }
        for (const auto& q : s.requests) {
            bool hosted = std::any_of(d.devices.begin(), d.devices.end(), [&](const DeviceDecl& dev) {
                return dev.hosts(q.storage_name);
            });
            if (!hosted) error(q.span, "no deployed device hosts storage '" + q.storage_name + "'");
        }
        if (s.logic.kind == LogicBinding::Kind::Builtin) {
            LogicContract contract = make_logic_contract(r, s);
            for (const auto& msg :
                 validate_builtin(s.logic.builtin_name, s.logic.builtin_params, contract)) {
                error(s.logic.span, msg);
            }
        }
    }
    if (!errs.empty()) {
        sort_diagnostics(errs);
        return errs;
    }

    r.topics = build_topics(r);

    std::set<std::string> consumed_anywhere;
    for (const auto& s : a.services) {
        for (const auto& c : s.consumes) consumed_anywhere.insert(c.data_name);
        for (const auto& c : s.commands) consumed_anywhere.insert(c.args.begin(), c.args.end());
    }
    for (const auto& s : v.sensors) {
        bool deployed = std::any_of(d.devices.begin(), d.devices.end(),
                                    [&](const DeviceDecl& dev) { return dev.hosts(s.name); });
        if (!deployed) continue;
        for (const auto& g : s.generates) {
            if (!consumed_anywhere.count(g.name)) {
                r.warnings.push_back(Diagnostic{g.span, Severity::Warning,
                                                "data '" + g.name + "' of deployed sensor '" +
                                                    s.name + "' is never consumed"});
            }
        }
    }
    for (const auto& s : a.services) {
        for (const auto& p : s.produces) {
            if (!consumed_anywhere.count(p.name)) {
                r.warnings.push_back(Diagnostic{p.span, Severity::Warning,
                                                "produced data '" + p.name + "' is never consumed"});
            }
        }
    }
    sort_diagnostics(r.warnings);
    return r;
}

// ------------------------------------------------------------ resolved.json

namespace {

using nlohmann::json;

json typed_list(const std::vector<TypedName>& items) {
    json out = json::array();
    for (const auto& t : items) out.push_back({{"name", t.name}, {"type", t.type}});
    return out;
}

}  // namespace

std::string resolved_to_json(const ResolvedApp& r) {
    const auto& v = r.vocabulary;
    json vocab = {{"name", v.name}};
    vocab["regions"] = json::array();
    for (const auto& reg : v.regions) vocab["regions"].push_back(reg.name);
    vocab["datatypes"] = json::array();
    for (const auto& rec : v.records) {
        vocab["datatypes"].push_back({{"name", rec.name}, {"fields", typed_list(rec.fields)}});
    }
    vocab["sensors"] = json::array();
    for (const auto& s : v.sensors) {
        vocab["sensors"].push_back({{"name", s.name}, {"generates", typed_list(s.generates)}});
    }
    vocab["actuators"] = json::array();
    for (const auto& act : v.actuators) {
        json actions = json::array();
        for (const auto& x : act.actions) {
            actions.push_back({{"name", x.name}, {"params", typed_list(x.params)}});
        }
        vocab["actuators"].push_back({{"name", act.name}, {"actions", actions}});
    }
    vocab["storages"] = json::array();
    for (const auto& s : v.storages) {
        vocab["storages"].push_back({{"name", s.name},
                                     {"data", {{"name", s.data_name}, {"type", s.data_type}}},
                                     {"key", {{"name", s.key_name}, {"type", s.key_type}}}});
    }

    json services = json::array();
    for (const auto& s : r.architecture.services) {
        json consumes = json::array();
        for (const auto& c : s.consumes) {
            json cj = {{"data", c.data_name}};
            cj["window"] = c.window ? json(*c.window) : json(nullptr);
            cj["period_ms"] = c.period_ms ? json(*c.period_ms) : json(nullptr);
            consumes.push_back(cj);
        }
        json requests = json::array();
        for (const auto& q : s.requests) {
            requests.push_back({{"data", q.data_name}, {"key", q.key_arg}, {"storage", q.storage_name}});
        }
        json commands = json::array();
        for (const auto& c : s.commands) {
            commands.push_back({{"action", c.action_name}, {"args", c.args}, {"actuator", c.actuator_name}});
        }
        json logic = {{"kind", s.logic.kind == LogicBinding::Kind::Builtin ? "builtin" : "extern"}};
        if (s.logic.kind == LogicBinding::Kind::Builtin) {
            logic["name"] = s.logic.builtin_name;
            json params = json::object();
            for (const auto& p : s.logic.builtin_params) params[p.key] = param_to_json(p.value);
            logic["params"] = params;
        } else {
            logic["handler"] = s.logic.handler_key;
        }
        services.push_back({{"name", s.name},
                            {"scope", s.scope},
                            {"consumes", consumes},
                            {"produces", typed_list(s.produces)},
                            {"requests", requests},
                            {"commands", commands},
                            {"logic", logic}});
    }

    json devices = json::array();
    for (const auto& dev : r.deployment.devices) {
        json coords = json::object();
        for (const auto& c : dev.coords) coords[c.region] = c.value;
        devices.push_back({{"name", dev.name},
                           {"region", coords},
                           {"resources", dev.resources},
                           {"platform", dev.platform}});
    }

    json data = json::object();
    for (const auto& [name, info] : r.data_index) {
        data[name] = {{"type", info.type}, {"origin", origin_name(info.origin)}, {"owner", info.owner}};
    }
    json instances = json::array();
    for (const auto& i : r.instances) instances.push_back(instance_to_json(i));
    json topics = json::array();
    for (const auto& t : r.topics) {
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
    json doc = {{"vocabulary", vocab},
                {"architecture",
                 {{"name", r.architecture.name},
                  {"uses", r.architecture.vocabulary_name},
                  {"services", services}}},
                {"deployment",
                 {{"name", r.deployment.name},
                  {"uses", r.deployment.vocabulary_name},
                  {"devices", devices}}},
                {"data_index", data},
                {"instances", instances},
                {"topics", topics}};
    return canonical_dump(doc);
}

}  // namespace iotforge
