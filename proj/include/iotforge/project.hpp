/// @file project.hpp
/// @brief Project layout, configuration, and the compile pipeline that turns
/// an app directory into the contents of `out/`.
///
/// Layout of an app directory:
///
///   spec/app.vocab  spec/app.arch  spec/app.deploy
///   logic/*.logic       extern handler bindings
///   drivers/*.drivers   resource driver bindings
///   traces/             sensor traces
///   iotforge.toml       optional configuration
///   out/                generated; safe to delete

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iotforge/ast.hpp"
#include "iotforge/codegen.hpp"
#include "iotforge/diagnostic.hpp"
#include "iotforge/mapper.hpp"
#include "iotforge/resolver.hpp"
#include "iotforge/runtime.hpp"

namespace iotforge {

namespace fs = std::filesystem;

/// Unreadable or missing input, or an unwritable output.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProjectLayout {
    fs::path root;
    fs::path out;

    explicit ProjectLayout(fs::path root_dir, std::optional<fs::path> out_dir = std::nullopt);

    fs::path vocab() const { return root / "spec" / "app.vocab"; }
    fs::path arch() const { return root / "spec" / "app.arch"; }
    fs::path deploy() const { return root / "spec" / "app.deploy"; }
    fs::path logic_dir() const { return root / "logic"; }
    fs::path drivers_dir() const { return root / "drivers"; }
    fs::path traces_dir() const { return root / "traces"; }
    fs::path config() const { return root / "iotforge.toml"; }

    /// Files of `dir` with `extension`, sorted by name; empty if `dir` is absent.
    static std::vector<fs::path> files_in(const fs::path& dir, std::string_view extension);
};

struct ScalingConfig {
    std::vector<int> counts;
    std::string region;                    // axis that grows with each roster round
    std::vector<RegionCoord> fixed;        // coordinates shared by every device
    std::string platform = "SimNode";
    std::vector<std::string> roster;       // resources of one region cell, one device each
};

struct AppConfig {
    std::string name;
    std::string behavior;
    std::string domain;
    bool matrix = true;  // include in the expressiveness table
    std::vector<std::string> baselines;  // sibling apps this one is diffed against
    std::uint64_t seed = 42;
    std::string trace;  // a config path is made absolute against the project root
    std::optional<std::int64_t> horizon_ms;  // unset: the last trace timestamp
    std::int64_t latency_ms = 5;
    std::int64_t request_latency_ms = 1;
    std::optional<fs::path> out;
    std::optional<ScalingConfig> scaling;
};

/// Reads `iotforge.toml` when present, then applies IOTFORGE_* environment
/// overrides (SEED, TRACE, HORIZON, LATENCY, OUT). Throws IoError on a
/// malformed file or value.
AppConfig load_config(const fs::path& root);

std::string read_file(const fs::path& p);
void write_file(const fs::path& p, std::string_view content);

struct LoadedProject {
    VocabularySpec vocabulary;
    ArchitectureSpec architecture;
    DeploymentSpec deployment;
    LogicManifest logic;
    DriverManifest drivers;
};

/// Parses every authored file. Diagnostics name files relative to the project
/// root. Throws IoError when a spec file is missing.
Outcome<LoadedProject> load_project(const ProjectLayout& layout);

/// Checks the manifests against the resolved app: each extern key bound to a
/// handler that fits its contract, each driver naming a declared resource.
std::vector<Diagnostic> check_manifests(const ResolvedApp& r, const LoadedProject& p);

struct CompileArtifacts {
    ResolvedApp resolved;
    Mapping mapping;
    Linkset linkset;
    std::vector<LogicContract> contracts;
    std::vector<DriverContract> drivers;
    /// Output files keyed by path relative to `out/`.
    std::map<std::string, std::string> files;
};

/// resolve, map with `seed`, and link.
Outcome<CompileArtifacts> compile_project(const LoadedProject& p, std::uint64_t seed);

/// The files of a link set as compile writes them (packages and index).
std::map<std::string, std::string> linkset_files(const Linkset& ls);

/// Writes `files` under `out`, first removing generated package files that
/// are no longer produced.
void write_outputs(const fs::path& out, const std::map<std::string, std::string>& files);

/// Reads `linkset.json` and the packages it lists from `out`.
Linkset load_linkset(const fs::path& out);

/// Handler registry for a project: its logic manifest bindings.
HandlerRegistry project_handlers(const LoadedProject& p);

}  // namespace iotforge
