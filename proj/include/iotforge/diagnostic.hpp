/// @file diagnostic.hpp
/// @brief Source locations, diagnostics, and the Outcome result type shared by
/// every compilation stage.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace iotforge {

/// A contiguous run of characters in a specification file. Lines and columns
/// are 1-based; a default-constructed span denotes "no location".
struct SourceSpan {
    std::string file;
    std::uint32_t line = 0;
    std::uint32_t column = 0;
    std::uint32_t length = 0;

    bool operator==(const SourceSpan&) const = default;
};

enum class Severity { Error, Warning, Note };

struct Diagnostic {
    SourceSpan span;
    Severity severity = Severity::Error;
    std::string message;
};

std::string_view severity_name(Severity s);

/// Renders `file:line:col: severity: message`, one line per diagnostic, in the
/// order given. Diagnostics without a location render as `file: severity: ...`.
std::string format_diagnostics(const std::vector<Diagnostic>& diags);

/// Sorts by (file, line, column) keeping the relative order of ties.
void sort_diagnostics(std::vector<Diagnostic>& diags);

bool has_errors(const std::vector<Diagnostic>& diags);

/// Either a value or a non-empty list of diagnostics, never both.
template <typename T>
class Outcome {
public:
    Outcome(T value) : state_(std::move(value)) {}
    Outcome(std::vector<Diagnostic> diags) : state_(std::move(diags)) {}

    bool ok() const { return std::holds_alternative<T>(state_); }
    explicit operator bool() const { return ok(); }

    T& value() & { return std::get<T>(state_); }
    const T& value() const& { return std::get<T>(state_); }
    T&& value() && { return std::get<T>(std::move(state_)); }

    const std::vector<Diagnostic>& diagnostics() const {
        return std::get<std::vector<Diagnostic>>(state_);
    }

private:
    std::variant<T, std::vector<Diagnostic>> state_;
};

}  // namespace iotforge
