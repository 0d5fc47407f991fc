#include "iotforge/diagnostic.hpp"

#include <algorithm>
#include <tuple>

namespace iotforge {

std::string_view severity_name(Severity s) {
    switch (s) {
        case Severity::Error: return "error";
        case Severity::Warning: return "warning";
        case Severity::Note: return "note";
    }
    return "error";
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
        out += d.span.file.empty() ? std::string("<input>") : d.span.file;
        if (d.span.line > 0) {
            out += ':' + std::to_string(d.span.line) + ':' + std::to_string(d.span.column);
        }
        out += ": ";
        out += severity_name(d.severity);
        out += ": ";
        out += d.message;
        out += '\n';
    }
    return out;
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
    std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
        return std::tie(a.span.file, a.span.line, a.span.column) <
               std::tie(b.span.file, b.span.line, b.span.column);
    });
}

bool has_errors(const std::vector<Diagnostic>& diags) {
    return std::any_of(diags.begin(), diags.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

}  // namespace iotforge
