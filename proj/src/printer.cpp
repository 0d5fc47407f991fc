#include <charconv>
#include <sstream>

#include "iotforge/frontend.hpp"

namespace iotforge {

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out + "\"";
}

}  // namespace

std::string format_duration(std::int64_t ms) {
    if (ms % 60000 == 0) return std::to_string(ms / 60000) + " min";
    if (ms % 1000 == 0) return std::to_string(ms / 1000) + " s";
    return std::to_string(ms) + " ms";
}

std::string print_param_value(const ParamValue& p) {
    switch (p.kind) {
        case ParamValue::Kind::Integer: return std::to_string(p.integer);
        case ParamValue::Kind::Real: {
            char buf[64];
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p.real, std::chars_format::fixed);
            std::string s(buf, ec == std::errc() ? end : buf);
            if (s.find('.') == std::string::npos) s += ".0";
            return s;
        }
        case ParamValue::Kind::String: return quote(p.text);
        case ParamValue::Kind::Boolean: return p.boolean ? "true" : "false";
        case ParamValue::Kind::Ident: return p.text;
    }
    return {};
}

static std::string print_params(const std::vector<LogicParam>& params) {
    std::vector<std::string> kv;
    for (const auto& p : params) kv.push_back(p.key + "=" + print_param_value(p.value));
    return "(" + join(kv, ", ") + ")";
}

std::string print_logic_binding(const LogicBinding& l) {
    if (l.kind == LogicBinding::Kind::Extern) return "extern " + l.handler_key;
    std::string out = "builtin " + l.builtin_name;
    if (!l.builtin_params.empty()) out += print_params(l.builtin_params);
    return out;
}

std::string print_vocabulary(const VocabularySpec& v) {
    std::ostringstream os;
    os << "vocabulary " << v.name << "\n";
    if (!v.regions.empty()) {
        os << "\nregions:\n";
        for (const auto& r : v.regions) os << "  " << r.name << ";\n";
    }
    if (!v.records.empty()) {
        os << "\ndatatypes:\n";
        for (const auto& r : v.records) {
            os << "  datatype " << r.name << " {\n";
            for (const auto& f : r.fields) os << "    " << f.name << ": " << f.type << ";\n";
            os << "  }\n";
        }
    }
    if (v.resource_count() > 0) {
        os << "\nresources:\n";
        for (const auto& s : v.sensors) {
            os << "  sensor " << s.name << " {\n";
            for (const auto& g : s.generates) {
                os << "    generate " << g.name << ": " << g.type << ";\n";
            }
            os << "  }\n";
        }
        for (const auto& a : v.actuators) {
            os << "  actuator " << a.name << " {\n";
            for (const auto& act : a.actions) {
                std::vector<std::string> params;
                for (const auto& p : act.params) params.push_back(p.name + ": " + p.type);
                os << "    action " << act.name << "(" << join(params, ", ") << ");\n";
            }
            os << "  }\n";
        }
        for (const auto& s : v.storages) {
            os << "  storage " << s.name << " {\n"
               << "    generate " << s.data_name << ": " << s.data_type << " accessed-by "
               << s.key_name << ": " << s.key_type << ";\n"
               << "  }\n";
        }
    }
    return os.str();
}

std::string print_architecture(const ArchitectureSpec& a) {
    std::ostringstream os;
    os << "architecture " << a.name << " uses " << a.vocabulary_name << "\n";
    for (const auto& s : a.services) {
        os << "\nservice " << s.name << " {\n";
        os << "  scope: " << s.scope << ";\n";
        for (const auto& c : s.consumes) {
            os << "  consume " << c.data_name;
            if (c.window) os << " window " << *c.window;
            if (c.period_ms) os << " every " << format_duration(*c.period_ms);
            os << ";\n";
        }
        for (const auto& p : s.produces) os << "  produce " << p.name << ": " << p.type << ";\n";
        for (const auto& r : s.requests) {
            os << "  request " << r.data_name << "(" << r.key_arg << ") from " << r.storage_name
               << ";\n";
        }
        for (const auto& c : s.commands) {
            os << "  command " << c.action_name << "(" << join(c.args, ", ") << ") to "
               << c.actuator_name << ";\n";
        }
        os << "  logic: " << print_logic_binding(s.logic) << ";\n";
        os << "}\n";
    }
    return os.str();
}

std::string print_deployment(const DeploymentSpec& d) {
    std::ostringstream os;
    os << "deployment " << d.name << " uses " << d.vocabulary_name << "\n";
    for (const auto& dev : d.devices) {
        std::vector<std::string> coords;
        for (const auto& c : dev.coords) coords.push_back(c.region + "=" + std::to_string(c.value));
        os << "\ndevice " << dev.name << " {\n"
           << "  region: " << join(coords, ", ") << ";\n"
           << "  resources: " << join(dev.resources, ", ") << ";\n"
           << "  platform: " << dev.platform << ";\n"
           << "}\n";
    }
    return os.str();
}

}  // namespace iotforge
