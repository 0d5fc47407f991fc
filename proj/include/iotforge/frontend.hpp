/// @file frontend.hpp
/// @brief Parsers and printers for the specification languages.
///
/// All parse functions are pure: they return either a fully checked tree or at
/// least one error diagnostic. Parsing stops at the first syntax error;
/// duplicate-name and type errors found in a syntactically valid file are all
/// reported.

#pragma once

#include <string>
#include <string_view>

#include "iotforge/ast.hpp"
#include "iotforge/diagnostic.hpp"

namespace iotforge {

Outcome<VocabularySpec> parse_vocabulary(std::string_view source, std::string_view file);
Outcome<ArchitectureSpec> parse_architecture(std::string_view source, std::string_view file);
Outcome<DeploymentSpec> parse_deployment(std::string_view source, std::string_view file);
Outcome<LogicManifest> parse_logic_manifest(std::string_view source, std::string_view file);
Outcome<DriverManifest> parse_driver_manifest(std::string_view source, std::string_view file);

// Canonical printers. Output reparses to a structurally equal tree.
std::string print_vocabulary(const VocabularySpec& v);
std::string print_architecture(const ArchitectureSpec& a);
std::string print_deployment(const DeploymentSpec& d);
std::string print_logic_binding(const LogicBinding& l);
std::string print_param_value(const ParamValue& p);

/// Formats a duration in the largest unit that divides it evenly.
std::string format_duration(std::int64_t ms);

}  // namespace iotforge
