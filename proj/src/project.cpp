#include "iotforge/project.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "iotforge/builtins.hpp"
#include "iotforge/frontend.hpp"

#include "toml.hpp"

namespace iotforge {

ProjectLayout::ProjectLayout(fs::path root_dir, std::optional<fs::path> out_dir)
    : root(std::move(root_dir)), out(out_dir ? *out_dir : root / "out") {}

std::vector<fs::path> ProjectLayout::files_in(const fs::path& dir, std::string_view extension) {
    std::vector<fs::path> out;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return out;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == extension) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + p.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("cannot write '" + p.string() + "'");
}

// ------------------------------------------------------------------- config

namespace {

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw IoError(what + " must be an integer, got '" + text + "'");
    }
    return v;
}

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

}  // namespace

AppConfig load_config(const fs::path& root) {
    AppConfig cfg;
    fs::path file = root / "iotforge.toml";
    if (fs::exists(file)) {
        toml::table tbl;
        try {
            tbl = toml::parse_file(file.string());
        } catch (const toml::parse_error& e) {
            std::ostringstream msg;
            msg << file.string() << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
                << e.description();
            throw IoError(msg.str());
        }
        cfg.name = tbl["app"]["name"].value_or(std::string());
        cfg.behavior = tbl["app"]["behavior"].value_or(std::string());
        cfg.domain = tbl["app"]["domain"].value_or(std::string());
        cfg.matrix = tbl["app"]["matrix"].value_or(true);
        if (const toml::array* b = tbl["app"]["baselines"].as_array()) {
            for (const auto& e : *b) cfg.baselines.push_back(e.value_or(std::string()));
        }
        if (auto seed = tbl["compile"]["seed"].value<std::int64_t>()) {
            if (*seed < 0) throw IoError(file.string() + ": compile.seed must be non-negative");
            cfg.seed = static_cast<std::uint64_t>(*seed);
        }
        if (auto t = tbl["simulate"]["trace"].value<std::string>(); t && !t->empty()) {
            cfg.trace = (root / *t).string();
        }
        if (auto h = tbl["simulate"]["horizon"].value<std::int64_t>()) cfg.horizon_ms = *h;
        cfg.latency_ms = tbl["simulate"]["latency"].value_or(std::int64_t{5});
        cfg.request_latency_ms = tbl["simulate"]["request_latency"].value_or(std::int64_t{1});
        if (auto out = tbl["compile"]["out"].value<std::string>()) cfg.out = root / *out;
        if (const toml::table* sc = tbl["scaling"].as_table()) {
            ScalingConfig s;
            if (const toml::array* counts = (*sc)["counts"].as_array()) {
                for (const auto& c : *counts) s.counts.push_back(static_cast<int>(c.value_or(std::int64_t{0})));
            }
            s.region = (*sc)["region"].value_or(std::string());
            s.platform = (*sc)["platform"].value_or(std::string("SimNode"));
            if (const toml::table* fixed = (*sc)["fixed"].as_table()) {
                for (const auto& [k, v] : *fixed) {
                    s.fixed.push_back(RegionCoord{std::string(k.str()), v.value_or(std::int64_t{0}), {}});
                }
            }
            if (const toml::array* roster = (*sc)["roster"].as_array()) {
                for (const auto& r : *roster) s.roster.push_back(r.value_or(std::string()));
            }
            cfg.scaling = std::move(s);
        }
    }
    if (auto v = env("IOTFORGE_SEED")) cfg.seed = parse_number<std::uint64_t>(*v, "IOTFORGE_SEED");
    if (auto v = env("IOTFORGE_TRACE")) cfg.trace = *v;
    if (auto v = env("IOTFORGE_HORIZON")) cfg.horizon_ms = parse_number<std::int64_t>(*v, "IOTFORGE_HORIZON");
    if (auto v = env("IOTFORGE_LATENCY")) cfg.latency_ms = parse_number<std::int64_t>(*v, "IOTFORGE_LATENCY");
    if (auto v = env("IOTFORGE_OUT")) cfg.out = fs::path(*v);
    return cfg;
}

// ------------------------------------------------------------------ loading

namespace {

std::string relative_name(const ProjectLayout& layout, const fs::path& p) {
    return p.lexically_relative(layout.root).generic_string();
}

template <typename T, typename Parse>
std::optional<T> parse_into(const ProjectLayout& layout, const fs::path& p, Parse parse,
                            std::vector<Diagnostic>& diags) {
    auto r = parse(read_file(p), relative_name(layout, p));
    if (!r.ok()) {
        diags.insert(diags.end(), r.diagnostics().begin(), r.diagnostics().end());
        return std::nullopt;
    }
    return std::move(r).value();
}

}  // namespace

Outcome<LoadedProject> load_project(const ProjectLayout& layout) {
    std::vector<Diagnostic> diags;
    for (const auto& p : {layout.vocab(), layout.arch(), layout.deploy()}) {
        if (!fs::is_regular_file(p)) throw IoError("missing specification file '" + p.string() + "'");
    }
    LoadedProject out;
    auto v = parse_into<VocabularySpec>(layout, layout.vocab(), parse_vocabulary, diags);
    auto a = parse_into<ArchitectureSpec>(layout, layout.arch(), parse_architecture, diags);
    auto d = parse_into<DeploymentSpec>(layout, layout.deploy(), parse_deployment, diags);
    std::map<std::string, SourceSpan> handler_keys;
    for (const auto& f : ProjectLayout::files_in(layout.logic_dir(), ".logic")) {
        auto m = parse_into<LogicManifest>(layout, f, parse_logic_manifest, diags);
        if (!m) continue;
        for (auto& h : m->handlers) {
            auto [it, fresh] = handler_keys.emplace(h.key, h.span);
            if (!fresh) {
                diags.push_back(Diagnostic{h.span, Severity::Error,
                                           "duplicate handler '" + h.key + "' (first bound in " +
                                               it->second.file + ")"});
                continue;
            }
            out.logic.handlers.push_back(std::move(h));
        }
    }
    std::map<std::string, SourceSpan> driver_resources;
    for (const auto& f : ProjectLayout::files_in(layout.drivers_dir(), ".drivers")) {
        auto m = parse_into<DriverManifest>(layout, f, parse_driver_manifest, diags);
        if (!m) continue;
        for (auto& b : m->drivers) {
            auto [it, fresh] = driver_resources.emplace(b.resource, b.span);
            if (!fresh) {
                diags.push_back(Diagnostic{b.span, Severity::Error,
                                           "duplicate driver for resource '" + b.resource + "' (first bound in " +
                                               it->second.file + ")"});
                continue;
            }
            out.drivers.drivers.push_back(std::move(b));
        }
    }
    if (!diags.empty()) {
        sort_diagnostics(diags);
        return diags;
    }
    out.vocabulary = std::move(*v);
    out.architecture = std::move(*a);
    out.deployment = std::move(*d);
    return out;
}

std::vector<Diagnostic> check_manifests(const ResolvedApp& r, const LoadedProject& p) {
    std::vector<Diagnostic> errs;
    for (const auto& s : r.architecture.services) {
        if (s.logic.kind != LogicBinding::Kind::Extern) continue;
        const HandlerBinding* h = p.logic.find(s.logic.handler_key);
        if (!h) {
            errs.push_back(Diagnostic{s.logic.span, Severity::Error,
                                      "extern handler '" + s.logic.handler_key + "' of service '" + s.name +
                                          "' is not bound in any logic manifest"});
            continue;
        }
        for (const auto& msg : validate_builtin(h->builtin_name, h->params, make_logic_contract(r, s))) {
            errs.push_back(Diagnostic{h->span, Severity::Error,
                                      "handler '" + h->key + "' for service '" + s.name + "': " + msg});
        }
    }
    for (const auto& b : p.drivers.drivers) {
        const auto& v = r.vocabulary;
        if (!v.find_sensor(b.resource) && !v.find_actuator(b.resource) && !v.find_storage(b.resource)) {
            errs.push_back(Diagnostic{b.span, Severity::Error,
                                      "driver bound to resource '" + b.resource +
                                          "', which the vocabulary does not declare"});
        }
    }
    sort_diagnostics(errs);
    return errs;
}

std::map<std::string, std::string> linkset_files(const Linkset& ls) {
    std::map<std::string, std::string> files;
    for (const auto& p : ls.packages) files["device/" + p.device + ".pkg.json"] = package_to_json(p);
    files["linkset.json"] = linkset_index_to_json(ls);
    return files;
}

Outcome<CompileArtifacts> compile_project(const LoadedProject& p, std::uint64_t seed) {
    auto resolved = resolve(p.vocabulary, p.architecture, p.deployment);
    if (!resolved.ok()) return resolved.diagnostics();
    CompileArtifacts art;
    art.resolved = std::move(resolved).value();
    if (auto errs = check_manifests(art.resolved, p); !errs.empty()) return errs;
    auto mapping = map_random(art.resolved, seed);
    if (!mapping.ok()) return mapping.diagnostics();
    art.mapping = std::move(mapping).value();
    auto ls = link(art.resolved, art.mapping, &p.drivers);
    if (!ls.ok()) return ls.diagnostics();
    art.linkset = std::move(ls).value();
    art.contracts = generate_architecture_framework(art.resolved);
    art.drivers = generate_vocabulary_framework(art.resolved.vocabulary, &p.drivers);

    art.files = linkset_files(art.linkset);
    art.files["resolved.json"] = resolved_to_json(art.resolved);
    art.files["mapping.json"] = mapping_to_json(art.mapping);
    art.files["contracts/architecture.json"] = contracts_to_json(art.contracts);
    art.files["contracts/vocabulary.json"] = drivers_to_json(art.drivers);
    return art;
}

void write_outputs(const fs::path& out, const std::map<std::string, std::string>& files) {
    std::error_code ec;
    fs::path device_dir = out / "device";
    if (fs::is_directory(device_dir, ec)) {
        for (const auto& f : ProjectLayout::files_in(device_dir, ".json")) {
            std::string rel = "device/" + f.filename().string();
            if (!files.count(rel)) fs::remove(f, ec);
        }
    }
    for (const auto& [rel, content] : files) write_file(out / rel, content);
}

Linkset load_linkset(const fs::path& out) {
    fs::path index_path = out / "linkset.json";
    if (!fs::exists(index_path)) throw IoError("no link set at '" + index_path.string() + "'; run compile first");
    try {
        nlohmann::json index = nlohmann::json::parse(read_file(index_path));
        std::vector<nlohmann::json> packages;
        for (const auto& p : index.at("packages")) {
            packages.push_back(nlohmann::json::parse(read_file(out / p.at("file").get<std::string>())));
        }
        return linkset_from_json(index, packages);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed link set in '" + out.string() + "': " + e.what());
    }
}

HandlerRegistry project_handlers(const LoadedProject& p) {
    HandlerRegistry reg;
    register_manifest(reg, p.logic);
    return reg;
}

}  // namespace iotforge
