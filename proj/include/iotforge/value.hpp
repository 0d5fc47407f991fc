/// @file value.hpp
/// @brief Runtime values carried by messages: double, long, string, boolean,
/// or a record of named fields.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "iotforge/ast.hpp"

#include "json.hpp"

namespace iotforge {

struct Value;

struct RecordValue {
    std::vector<std::string> names;
    std::vector<Value> fields;

    bool operator==(const RecordValue& other) const;
};

struct Value {
    std::variant<double, std::int64_t, std::string, bool, RecordValue> data;

    Value() : data(0.0) {}
    Value(double d) : data(d) {}
    Value(std::int64_t l) : data(l) {}
    Value(int l) : data(static_cast<std::int64_t>(l)) {}
    Value(std::string s) : data(std::move(s)) {}
    Value(const char* s) : data(std::string(s)) {}
    Value(bool b) : data(b) {}
    Value(RecordValue r) : data(std::move(r)) {}

    bool is_double() const { return std::holds_alternative<double>(data); }
    bool is_long() const { return std::holds_alternative<std::int64_t>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_record() const { return std::holds_alternative<RecordValue>(data); }
    bool is_number() const { return is_double() || is_long(); }

    double as_number() const;
    bool as_bool() const { return std::get<bool>(data); }
    const std::string& as_string() const { return std::get<std::string>(data); }

    bool operator==(const Value& other) const { return data == other.data; }
};

/// Record declarations visible to type checking, keyed by name.
using RecordTable = std::vector<RecordDecl>;

nlohmann::json value_to_json(const Value& v);

/// Decodes `j` as `type`. Integers are accepted for `double`; records must
/// carry exactly the declared fields. Returns nullopt with `error` set on
/// mismatch.
std::optional<Value> value_from_json(const nlohmann::json& j, std::string_view type,
                                     const RecordTable& records, std::string* error = nullptr);

bool value_has_type(const Value& v, std::string_view type, const RecordTable& records);

/// Converts a builtin parameter literal to a value of `type`.
std::optional<Value> value_from_param(const ParamValue& p, std::string_view type);

std::string value_to_text(const Value& v);

}  // namespace iotforge
