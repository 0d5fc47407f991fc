#include "iotforge/value.hpp"

#include <algorithm>

namespace iotforge {

bool RecordValue::operator==(const RecordValue& other) const {
    return names == other.names && fields == other.fields;
}

double Value::as_number() const {
    if (is_double()) return std::get<double>(data);
    return static_cast<double>(std::get<std::int64_t>(data));
}

nlohmann::json value_to_json(const Value& v) {
    struct Visitor {
        nlohmann::json operator()(double d) const { return d; }
        nlohmann::json operator()(std::int64_t l) const { return l; }
        nlohmann::json operator()(const std::string& s) const { return s; }
        nlohmann::json operator()(bool b) const { return b; }
        nlohmann::json operator()(const RecordValue& r) const {
            nlohmann::json obj = nlohmann::json::object();
            for (std::size_t i = 0; i < r.names.size(); ++i) {
                obj[r.names[i]] = value_to_json(r.fields[i]);
            }
            return obj;
        }
    };
    return std::visit(Visitor{}, v.data);
}

namespace {

const RecordDecl* find_record(const RecordTable& records, std::string_view name) {
    auto it = std::find_if(records.begin(), records.end(),
                           [&](const RecordDecl& r) { return r.name == name; });
    return it == records.end() ? nullptr : &*it;
}

std::optional<Value> fail(std::string* error, std::string msg) {
    if (error) *error = std::move(msg);
    return std::nullopt;
}

}  // namespace

std::optional<Value> value_from_json(const nlohmann::json& j, std::string_view type,
                                     const RecordTable& records, std::string* error) {
    const std::string t(type);
    if (type == "double") {
        if (!j.is_number()) return fail(error, "expected a number for type double");
        return Value(j.get<double>());
    }
    if (type == "long") {
        if (!j.is_number_integer()) return fail(error, "expected an integer for type long");
        return Value(j.get<std::int64_t>());
    }
    if (type == "string") {
        if (!j.is_string()) return fail(error, "expected a string");
        return Value(j.get<std::string>());
    }
    if (type == "boolean") {
        if (!j.is_boolean()) return fail(error, "expected a boolean");
        return Value(j.get<bool>());
    }
    const RecordDecl* rec = find_record(records, type);
    if (!rec) return fail(error, "unknown type '" + t + "'");
    if (!j.is_object()) return fail(error, "expected an object for datatype '" + t + "'");
    if (j.size() != rec->fields.size()) {
        return fail(error, "datatype '" + t + "' expects " + std::to_string(rec->fields.size()) +
                               " fields");
    }
    RecordValue out;
    for (const auto& f : rec->fields) {
        auto it = j.find(f.name);
        if (it == j.end()) return fail(error, "missing field '" + f.name + "'");
        auto field = value_from_json(*it, f.type, records, error);
        if (!field) return std::nullopt;
        out.names.push_back(f.name);
        out.fields.push_back(std::move(*field));
    }
    return Value(std::move(out));
}

bool value_has_type(const Value& v, std::string_view type, const RecordTable& records) {
    if (type == "double") return v.is_double();
    if (type == "long") return v.is_long();
    if (type == "string") return v.is_string();
    if (type == "boolean") return v.is_bool();
    const RecordDecl* rec = find_record(records, type);
    if (!rec || !v.is_record()) return false;
    const auto& r = std::get<RecordValue>(v.data);
    if (r.names.size() != rec->fields.size()) return false;
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        if (r.names[i] != rec->fields[i].name) return false;
        if (!value_has_type(r.fields[i], rec->fields[i].type, records)) return false;
    }
    return true;
}

std::optional<Value> value_from_param(const ParamValue& p, std::string_view type) {
    if (type == "double" && p.is_number()) return Value(p.as_number());
    if (type == "long" && p.kind == ParamValue::Kind::Integer) return Value(p.integer);
    if (type == "string" && p.kind == ParamValue::Kind::String) return Value(p.text);
    if (type == "boolean" && p.kind == ParamValue::Kind::Boolean) return Value(p.boolean);
    return std::nullopt;
}

std::string value_to_text(const Value& v) { return value_to_json(v).dump(); }

}  // namespace iotforge
