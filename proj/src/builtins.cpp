#include "iotforge/builtins.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace iotforge {

double SlotState::mean() const {
    double sum = 0.0;
    for (const auto& v : window) sum += v.as_number();
    return window.empty() ? 0.0 : sum / static_cast<double>(window.size());
}

const SlotState& StepContext::slot(std::string_view data) const {
    auto it = inputs->find(std::string(data));
    if (it == inputs->end()) throw std::out_of_range("no input slot '" + std::string(data) + "'");
    return it->second;
}

bool is_builtin(std::string_view name) {
    return std::any_of(std::begin(kBuiltinNames), std::end(kBuiltinNames),
                       [&](const char* b) { return name == b; });
}

namespace {

constexpr const char* kComparators[] = {"gt", "ge", "lt", "le", "eq", "ne"};

bool is_comparator(std::string_view s) {
    return std::any_of(std::begin(kComparators), std::end(kComparators),
                       [&](const char* c) { return s == c; });
}

bool compare(std::string_view op, double lhs, double rhs) {
    if (op == "gt") return lhs > rhs;
    if (op == "ge") return lhs >= rhs;
    if (op == "lt") return lhs < rhs;
    if (op == "le") return lhs <= rhs;
    if (op == "eq") return lhs == rhs;
    return lhs != rhs;
}

struct Comparison {
    std::string op;
    double rhs = 0.0;
};

/// Per-input predicates decoded from a parameter list.
struct PredicateSet {
    std::vector<Comparison> general;
    std::unordered_map<std::string, std::vector<Comparison>> specific;
    std::unordered_map<std::string, bool> negated;

    const std::vector<Comparison>& for_input(const std::string& data) const {
        auto it = specific.find(data);
        return it != specific.end() ? it->second : general;
    }
};

/// Splits `lt_avgSpeed` into ("lt", "avgSpeed"); `gt` into ("gt", "").
std::pair<std::string, std::string> split_key(const std::string& key) {
    auto us = key.find('_');
    if (us == std::string::npos) return {key, ""};
    return {key.substr(0, us), key.substr(us + 1)};
}

/// Decodes comparator and negation params; unknown keys become errors.
PredicateSet decode_predicates(const std::vector<LogicParam>& params, const LogicContract& c,
                               bool allow_negation, std::vector<std::string>& errors) {
    PredicateSet out;
    for (const auto& p : params) {
        auto [head, target] = split_key(p.key);
        if (is_comparator(head)) {
            if (!p.value.is_number()) {
                errors.push_back("parameter '" + p.key + "' needs a numeric value");
                continue;
            }
            if (target.empty()) {
                out.general.push_back({head, p.value.as_number()});
                continue;
            }
            const InputSlot* in = c.input(target);
            if (!in) {
                errors.push_back("parameter '" + p.key + "' names unknown input '" + target + "'");
            } else if (!is_numeric_type(in->data_type)) {
                errors.push_back("parameter '" + p.key + "' compares non-numeric input '" +
                                 target + "'");
            } else {
                out.specific[target].push_back({head, p.value.as_number()});
            }
        } else if (allow_negation && head == "not" && !target.empty()) {
            const InputSlot* in = c.input(target);
            if (!in || in->data_type != "boolean") {
                errors.push_back("parameter '" + p.key + "' must name a boolean input");
            } else if (p.value.kind != ParamValue::Kind::Boolean) {
                errors.push_back("parameter '" + p.key + "' needs true or false");
            } else {
                out.negated[target] = p.value.boolean;
            }
        } else {
            errors.push_back("unknown parameter '" + p.key + "'");
        }
    }
    return out;
}

void require_no_requests(const LogicContract& c, std::vector<std::string>& errors) {
    if (!c.requests.empty()) errors.push_back("only keyed-lookup-forward can issue requests");
}

void require_single_input(const LogicContract& c, std::vector<std::string>& errors) {
    if (c.inputs.size() != 1) errors.push_back("needs exactly one input");
}

void require_outputs(const LogicContract& c, std::size_t max, std::string_view type,
                     std::vector<std::string>& errors) {
    if (c.outputs.size() > max) {
        errors.push_back("produces at most " + std::to_string(max) + " output");
        return;
    }
    for (const auto& o : c.outputs) {
        if (!type.empty() && o.data_type != type) {
            errors.push_back("output '" + o.data_name + "' must have type " + std::string(type));
        }
    }
}

void require_no_params(const std::vector<LogicParam>& params, std::vector<std::string>& errors) {
    for (const auto& p : params) errors.push_back("unknown parameter '" + p.key + "'");
}

double reduce_numeric(const SlotState& s, const InputSlot& in) {
    return in.window ? s.mean() : s.latest().as_number();
}

bool evaluate(const PredicateSet& preds, const InputSlot& in, const SlotState& s) {
    if (in.data_type == "boolean") {
        bool b = s.latest().as_bool();
        auto it = preds.negated.find(in.data_name);
        return (it != preds.negated.end() && it->second) ? !b : b;
    }
    double v = reduce_numeric(s, in);
    const auto& cmps = preds.for_input(in.data_name);
    return std::all_of(cmps.begin(), cmps.end(),
                       [&](const Comparison& c) { return compare(c.op, v, c.rhs); });
}

void emit_boolean(const LogicContract& c, bool value, StepResult& r) {
    for (const auto& o : c.outputs) r.outputs.emplace_back(o.data_name, Value(value));
    r.fire = value;
}

}  // namespace

std::vector<std::string> validate_builtin(std::string_view name,
                                          const std::vector<LogicParam>& params,
                                          const LogicContract& c) {
    std::vector<std::string> errors;
    const std::string n(name);
    if (!is_builtin(name)) {
        errors.push_back("unknown builtin '" + n + "'");
        return errors;
    }
    if (c.inputs.empty()) errors.push_back("needs at least one input");
    if (name == "average") {
        require_single_input(c, errors);
        require_no_requests(c, errors);
        require_no_params(params, errors);
        if (c.inputs.size() == 1 && !is_numeric_type(c.inputs[0].data_type)) {
            errors.push_back("input '" + c.inputs[0].data_name + "' must be numeric");
        }
        if (c.outputs.size() != 1 || c.outputs[0].data_type != "double") {
            errors.push_back("needs exactly one double output");
        }
    } else if (name == "threshold") {
        require_single_input(c, errors);
        require_no_requests(c, errors);
        require_outputs(c, 1, "boolean", errors);
        auto preds = decode_predicates(params, c, false, errors);
        if (c.inputs.size() == 1) {
            if (!is_numeric_type(c.inputs[0].data_type)) {
                errors.push_back("input '" + c.inputs[0].data_name + "' must be numeric");
            } else if (preds.for_input(c.inputs[0].data_name).empty()) {
                errors.push_back("needs a comparator parameter (gt, ge, lt, le, eq, ne)");
            }
        }
    } else if (name == "all" || name == "any") {
        require_no_requests(c, errors);
        require_outputs(c, 1, "boolean", errors);
        auto preds = decode_predicates(params, c, true, errors);
        for (const auto& in : c.inputs) {
            if (in.data_type == "boolean") continue;
            if (!is_numeric_type(in.data_type)) {
                errors.push_back("input '" + in.data_name + "' must be boolean or numeric");
            } else if (preds.for_input(in.data_name).empty()) {
                errors.push_back("numeric input '" + in.data_name + "' needs a comparator");
            }
        }
    } else if (name == "passthrough") {
        require_single_input(c, errors);
        require_no_requests(c, errors);
        require_no_params(params, errors);
        if (c.inputs.size() == 1) require_outputs(c, 1, c.inputs[0].data_type, errors);
    } else if (name == "latch") {
        require_single_input(c, errors);
        require_no_requests(c, errors);
        require_no_params(params, errors);
        require_outputs(c, 1, "boolean", errors);
        if (c.inputs.size() == 1 && c.inputs[0].data_type != "boolean") {
            errors.push_back("input '" + c.inputs[0].data_name + "' must be boolean");
        }
    } else if (name == "keyed-lookup-forward") {
        if (c.requests.size() != 1) {
            errors.push_back("needs exactly one request");
        } else {
            const auto& req = c.requests[0];
            require_outputs(c, 1, req.data_type, errors);
            for (const auto& p : params) {
                if (p.key != "default") {
                    errors.push_back("unknown parameter '" + p.key + "'");
                } else if (!value_from_param(p.value, req.data_type)) {
                    errors.push_back("parameter 'default' must have type " + req.data_type);
                }
            }
        }
    }
    for (auto& e : errors) e = n + ": " + e;
    return errors;
}

LogicFunction make_builtin(std::string_view name, const std::vector<LogicParam>& params,
                           const LogicContract& contract) {
    auto errors = validate_builtin(name, params, contract);
    if (!errors.empty()) throw std::invalid_argument(errors.front());
    auto c = std::make_shared<const LogicContract>(contract);

    if (name == "average") {
        return [c](const StepContext& ctx) {
            StepResult r;
            r.outputs.emplace_back(c->outputs[0].data_name,
                                   Value(ctx.slot(c->inputs[0].data_name).mean()));
            r.fire = true;
            return r;
        };
    }
    if (name == "threshold" || name == "all" || name == "any") {
        std::vector<std::string> unused;
        auto preds = std::make_shared<const PredicateSet>(
            decode_predicates(params, contract, name != "threshold", unused));
        bool conjunction = name != "any";
        return [c, preds, conjunction](const StepContext& ctx) {
            bool result = conjunction;
            for (const auto& in : c->inputs) {
                bool v = evaluate(*preds, in, ctx.slot(in.data_name));
                result = conjunction ? (result && v) : (result || v);
            }
            StepResult r;
            emit_boolean(*c, result, r);
            return r;
        };
    }
    if (name == "passthrough") {
        return [c](const StepContext& ctx) {
            StepResult r;
            const Value& v = ctx.slot(c->inputs[0].data_name).latest();
            for (const auto& o : c->outputs) r.outputs.emplace_back(o.data_name, v);
            r.fire = true;
            return r;
        };
    }
    if (name == "latch") {
        auto latched = std::make_shared<std::map<std::string, bool>>();
        return [c, latched](const StepContext& ctx) {
            bool on = ctx.slot(c->inputs[0].data_name).latest().as_bool();
            bool& state = (*latched)[ctx.trigger_scope];
            StepResult r;
            for (const auto& o : c->outputs) r.outputs.emplace_back(o.data_name, Value(on));
            r.fire = on && !state;
            state = on;
            return r;
        };
    }
    // keyed-lookup-forward
    std::optional<Value> fallback;
    for (const auto& p : params) {
        if (p.key == "default") fallback = value_from_param(p.value, contract.requests[0].data_type);
    }
    return [c, fallback](const StepContext& ctx) {
        StepResult r;
        const auto& req = c->requests[0];
        if (ctx.trigger == StepContext::Trigger::Input) {
            r.requests.emplace_back(req.data_name, ctx.slot(req.key_arg).latest());
            return r;
        }
        std::optional<Value> v = ctx.response ? ctx.response : fallback;
        if (!v) return r;
        for (const auto& o : c->outputs) r.outputs.emplace_back(o.data_name, *v);
        r.fire = true;
        return r;
    };
}

}  // namespace iotforge
