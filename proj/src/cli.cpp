#include "iotforge/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "iotforge/frontend.hpp"
#include "iotforge/metrics.hpp"
#include "iotforge/project.hpp"

namespace iotforge {

namespace {

// Thrown by the command bodies; run_cli turns it into exit code 1.
struct DiagnosticFailure {
    std::vector<Diagnostic> diags;
};

struct Flags {
    std::string project;
    std::vector<std::string> projects;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> horizon;
    std::optional<std::int64_t> latency;
    std::optional<std::string> trace;
    std::optional<std::string> out;
    std::string kind = "loc";
};

struct Context {
    AppConfig cfg;
    ProjectLayout layout;
};

// flags > IOTFORGE_* > iotforge.toml
Context settings(const std::string& project, const Flags& f, bool project_out = true) {
    fs::path root(project);
    if (!fs::is_directory(root)) throw IoError("no project directory '" + project + "'");
    AppConfig cfg = load_config(root);
    if (f.seed) cfg.seed = *f.seed;
    if (f.horizon) cfg.horizon_ms = *f.horizon;
    if (f.latency) cfg.latency_ms = *f.latency;
    if (f.trace) cfg.trace = *f.trace;
    if (project_out && f.out) cfg.out = fs::path(*f.out);
    return Context{cfg, ProjectLayout(root, cfg.out)};
}

template <typename T>
T unwrap(Outcome<T> o) {
    if (!o.ok()) throw DiagnosticFailure{o.diagnostics()};
    return std::move(o).value();
}

void report_warnings(const std::vector<Diagnostic>& w, std::ostream& err) {
    if (!w.empty()) err << format_diagnostics(w);
}

LoadedProject load(const Context& c) { return unwrap(load_project(c.layout)); }

ResolvedApp resolve_checked(const LoadedProject& p) {
    auto r = unwrap(resolve(p.vocabulary, p.architecture, p.deployment));
    if (auto errs = check_manifests(r, p); !errs.empty()) throw DiagnosticFailure{errs};
    return r;
}

std::string app_label(const Context& c) { return c.layout.root.filename().string(); }

std::vector<SensorTrace> load_traces(const AppConfig& cfg) {
    std::vector<SensorTrace> traces;
    if (cfg.trace.empty()) return traces;
    traces.push_back(unwrap(parse_trace(read_file(cfg.trace), cfg.trace)));
    return traces;
}

SimConfig sim_config(const AppConfig& cfg, const std::vector<SensorTrace>& traces) {
    SimConfig sc;
    sc.latency_ms = cfg.latency_ms;
    sc.request_latency_ms = cfg.request_latency_ms;
    sc.seed = cfg.seed;
    sc.horizon_ms = cfg.horizon_ms.value_or(0);
    // no horizon: run until the last trace entry
    if (!cfg.horizon_ms) {
        for (const auto& t : traces) {
            if (!t.entries.empty()) sc.horizon_ms = std::max(sc.horizon_ms, t.entries.back().t);
        }
    }
    return sc;
}

struct SimOutcome {
    Linkset linkset;
    SimResult result;
};

SimOutcome run_sim(const Context& c, const LoadedProject& p) {
    Linkset ls = load_linkset(c.layout.out);
    auto traces = load_traces(c.cfg);
    HandlerRegistry reg = project_handlers(p);
    SimResult res = simulate(ls, traces, reg, sim_config(c.cfg, traces));
    write_file(c.layout.out / "actuation.log", actuation_log_to_text(res.log));
    return SimOutcome{std::move(ls), std::move(res)};
}

// ------------------------------------------------------------------ commands

int cmd_compile(const Flags& f, std::ostream& out, std::ostream& err) {
    Context c = settings(f.project, f);
    LoadedProject p = load(c);
    CompileArtifacts art = unwrap(compile_project(p, c.cfg.seed));
    report_warnings(art.resolved.warnings, err);
    write_outputs(c.layout.out, art.files);
    out << "compiled " << app_label(c) << ": " << art.resolved.instances.size() << " instances, "
        << art.linkset.packages.size() << " packages -> " << c.layout.out.string() << "\n";
    return kExitOk;
}

int cmd_map(const Flags& f, std::ostream& out, std::ostream& err) {
    Context c = settings(f.project, f);
    LoadedProject p = load(c);
    ResolvedApp r = resolve_checked(p);
    report_warnings(r.warnings, err);
    Mapping m = unwrap(map_random(r, c.cfg.seed));
    write_file(c.layout.out / "resolved.json", resolved_to_json(r));
    write_file(c.layout.out / "mapping.json", mapping_to_json(m));
    out << "mapped " << m.assignments.size() << " instances (seed " << m.seed << ") -> "
        << (c.layout.out / "mapping.json").string() << "\n";
    return kExitOk;
}

int cmd_link(const Flags& f, std::ostream& out, std::ostream& err) {
    Context c = settings(f.project, f);
    LoadedProject p = load(c);
    ResolvedApp r = resolve_checked(p);
    report_warnings(r.warnings, err);
    fs::path mpath = c.layout.out / "mapping.json";
    if (!fs::exists(mpath)) throw IoError("no mapping at '" + mpath.string() + "'; run map first");
    Mapping m = unwrap(mapping_from_json(read_file(mpath), r));
    auto violations = validate_mapping(m, r);
    if (!violations.empty()) {
        std::vector<Diagnostic> d;
        for (const auto& v : violations) {
            d.push_back(Diagnostic{SourceSpan{mpath.string(), 0, 0, 0}, Severity::Error, v.message});
        }
        throw DiagnosticFailure{d};
    }
    Linkset ls = unwrap(link(r, m, &p.drivers));
    auto files = linkset_files(ls);
    files["contracts/architecture.json"] = contracts_to_json(generate_architecture_framework(r));
    files["contracts/vocabulary.json"] = drivers_to_json(generate_vocabulary_framework(r.vocabulary, &p.drivers));
    write_outputs(c.layout.out, files);
    out << "linked " << ls.packages.size() << " packages -> " << c.layout.out.string() << "\n";
    return kExitOk;
}

int cmd_simulate(const Flags& f, std::ostream& out, std::ostream& err) {
    Context c = settings(f.project, f);
    LoadedProject p = load(c);
    if (!fs::exists(c.layout.out / "linkset.json")) {
        err << "error: no link set in '" << c.layout.out.string() << "'; run compile first\n";
        return kExitDiagnostics;
    }
    SimOutcome s = run_sim(c, p);
    out << "simulated " << app_label(c) << ": " << s.result.events_processed << " events, "
        << s.result.log.size() << " actuations -> " << (c.layout.out / "actuation.log").string() << "\n";
    return kExitOk;
}

// Header of the first table, rows of all.
std::string concat_csv(const std::vector<std::string>& tables) {
    std::string outs;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        std::string_view t = tables[i];
        if (i > 0) {
            auto nl = t.find('\n');
            t = nl == std::string_view::npos ? std::string_view() : t.substr(nl + 1);
        }
        outs += t;
    }
    return outs;
}

struct Compiled {
    Context ctx;
    LoadedProject project;
    CompileArtifacts art;
};

Compiled compile_in_memory(const std::string& dir, const Flags& f) {
    Context c = settings(dir, f, false);
    LoadedProject p = load(c);
    CompileArtifacts art = unwrap(compile_project(p, c.cfg.seed));
    return Compiled{c, std::move(p), std::move(art)};
}

std::vector<ReuseReport> reuse_for(const Context& c) {
    std::vector<ReuseReport> out;
    for (const auto& b : c.cfg.baselines) {
        out.push_back(reuse_report(ProjectLayout(c.layout.root.parent_path() / b), c.layout));
    }
    return out;
}

std::vector<ScalingSeries> scaling_for(const Context& c) {
    std::vector<ScalingSeries> out;
    if (c.cfg.scaling) {
        out.push_back(unwrap(scaling_series(c.layout, *c.cfg.scaling, c.cfg.scaling->counts, c.cfg.seed)));
    }
    return out;
}

void write_report(const fs::path& dir, const std::string& name, const std::string& content, std::ostream& out) {
    write_file(dir / name, content);
    out << "wrote " << (dir / name).string() << "\n";
}

void write_scaling(const fs::path& dir, const std::vector<ScalingSeries>& series, bool csv, bool svg,
                   std::ostream& out) {
    if (csv) {
        std::vector<std::string> tables;
        for (const auto& s : series) tables.push_back(scaling_csv(s));
        write_report(dir, "scaling.csv", concat_csv(tables), out);
    }
    if (svg) {
        for (const auto& s : series) {
            std::string name = series.size() == 1 ? "scaling.svg" : "scaling-" + s.app + ".svg";
            write_report(dir, name, scaling_svg(s), out);
        }
    }
}

int cmd_metrics(const Flags& f, std::ostream& out, std::ostream&) {
    static const std::vector<std::string> kinds = {"loc", "reuse", "scaling", "expressiveness", "sizes", "plot"};
    if (std::find(kinds.begin(), kinds.end(), f.kind) == kinds.end()) {
        throw CLI::ValidationError("--kind", "unknown metric kind '" + f.kind + "'");
    }
    fs::path dir = f.out ? fs::path(*f.out) : fs::path(f.projects.front()) / "out" / "reports";
    if (f.kind == "reuse") {
        std::vector<ReuseReport> reports;
        if (f.projects.size() == 1) {
            reports = reuse_for(settings(f.projects.front(), f, false));
        } else {
            ProjectLayout base(f.projects.front());
            for (std::size_t i = 1; i < f.projects.size(); ++i) {
                reports.push_back(reuse_report(base, ProjectLayout(f.projects[i])));
            }
        }
        write_report(dir, "reuse.csv", reuse_csv(reports), out);
        return kExitOk;
    }
    if (f.kind == "scaling" || f.kind == "plot") {
        std::vector<ScalingSeries> series;
        for (const auto& p : f.projects) {
            Context c = settings(p, f, false);
            if (!c.cfg.scaling) {
                throw DiagnosticFailure{{Diagnostic{SourceSpan{c.layout.config().string(), 0, 0, 0}, Severity::Error,
                                                    "no [scaling] section"}}};
            }
            for (auto& s : scaling_for(c)) series.push_back(std::move(s));
        }
        write_scaling(dir, series, f.kind == "scaling", true, out);
        return kExitOk;
    }
    std::vector<LocReport> locs;
    std::vector<ExpressivenessRow> rows;
    std::vector<PackageSizeRow> sizes;
    for (const auto& p : f.projects) {
        Compiled c = compile_in_memory(p, f);
        locs.push_back(loc_report(c.ctx.layout, c.art.files, app_label(c.ctx)));
        rows.push_back(expressiveness_row(c.art.resolved, c.ctx.cfg));
        auto s = package_sizes(app_label(c.ctx), c.art.linkset);
        sizes.insert(sizes.end(), s.begin(), s.end());
    }
    if (f.kind == "loc") write_report(dir, "report.csv", loc_csv(locs), out);
    if (f.kind == "expressiveness") write_report(dir, "expressiveness.md", expressiveness_md(rows), out);
    if (f.kind == "sizes") write_report(dir, "package-sizes.csv", package_sizes_csv(sizes), out);
    return kExitOk;
}

std::string format_ratio(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

int cmd_corpus(const Flags& f, std::ostream& out, std::ostream& err) {
    fs::path dir(f.project);
    if (!fs::is_directory(dir)) throw IoError("no corpus directory '" + f.project + "'");
    fs::path root = f.out ? fs::path(*f.out) : dir / "out";
    std::vector<fs::path> apps;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory() && fs::exists(e.path() / "spec" / "app.vocab")) apps.push_back(e.path());
    }
    std::sort(apps.begin(), apps.end());

    std::vector<LocReport> locs;
    std::vector<ReuseReport> reuse;
    std::vector<ScalingSeries> scaling;
    std::vector<ExpressivenessRow> rows;
    std::vector<PackageSizeRow> sizes;
    std::string summary = "app,instances,devices,handwritten,generated,ratio,tasks,coverage,actuations\n";
    int code = kExitOk;
    for (const auto& app : apps) {
        std::string name = app.filename().string();
        try {
            Flags af = f;
            af.out = (root / name).string();
            af.trace.reset();
            Context c = settings(app.string(), af);
            LoadedProject p = load(c);
            CompileArtifacts art = unwrap(compile_project(p, c.cfg.seed));
            if (!art.resolved.warnings.empty()) err << name << ":\n";
            report_warnings(art.resolved.warnings, err);
            write_outputs(c.layout.out, art.files);
            SimOutcome s = run_sim(c, p);

            LocReport loc = loc_report(c.layout, art.files, name);
            std::size_t tasks = 0;
            for (const auto& pkg : art.linkset.packages) tasks += pkg.tasks.size();
            summary += csv_field(name) + "," + std::to_string(art.resolved.instances.size()) + "," +
                       std::to_string(art.resolved.deployment.devices.size()) + "," +
                       std::to_string(loc.handwritten_total()) + "," + std::to_string(loc.generated_lines) + "," +
                       format_ratio(generation_ratio(loc)) + "," + std::to_string(tasks) + "," +
                       format_ratio(task_coverage(s.linkset, s.result)) + "," + std::to_string(s.result.log.size()) +
                       "\n";
            locs.push_back(std::move(loc));
            if (c.cfg.matrix) rows.push_back(expressiveness_row(art.resolved, c.cfg));
            auto ps = package_sizes(name, art.linkset);
            sizes.insert(sizes.end(), ps.begin(), ps.end());
            for (auto& r : reuse_for(c)) reuse.push_back(std::move(r));
            for (auto& sc : scaling_for(c)) scaling.push_back(std::move(sc));
            out << name << ": " << s.result.log.size() << " actuations\n";
        } catch (const DiagnosticFailure& d) {
            err << name << ":\n" << format_diagnostics(d.diags);
            code = kExitDiagnostics;
        }
    }
    fs::path reports = root / "reports";
    write_report(reports, "report.csv", loc_csv(locs), out);
    write_report(reports, "summary.csv", summary, out);
    write_report(reports, "reuse.csv", reuse_csv(reuse), out);
    if (!scaling.empty()) write_scaling(reports, scaling, true, true, out);
    write_report(reports, "expressiveness.md", expressiveness_md(rows), out);
    write_report(reports, "package-sizes.csv", package_sizes_csv(sizes), out);
    return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"iotforge: compile, deploy and simulate sense-compute-control IoT apps", "iotforge"};
    app.require_subcommand(1);
    Flags f;

    auto* compile = app.add_subcommand("compile", "resolve, map and link a project into out/");
    auto* map = app.add_subcommand("map", "resolve a project and write its mapping");
    auto* linkc = app.add_subcommand("link", "link out/mapping.json into device packages");
    auto* sim = app.add_subcommand("simulate", "run the compiled packages against a sensor trace");
    auto* metrics = app.add_subcommand("metrics", "development-effort reports");
    auto* corpus = app.add_subcommand("corpus", "compile and simulate every app of a corpus, then report");

    for (auto* sc : {compile, map, linkc, sim}) {
        sc->add_option("project", f.project, "project directory")->required();
        sc->add_option("--seed", f.seed, "mapping seed");
        sc->add_option("--out", f.out, "output directory (default <project>/out)");
    }
    sim->add_option("--trace", f.trace, "sensor trace (.jsonl)");
    sim->add_option("--horizon", f.horizon, "simulated time in ms");
    sim->add_option("--latency", f.latency, "per-hop latency in ms");

    metrics->add_option("projects", f.projects, "project directories")->required();
    metrics->add_option("--kind", f.kind, "loc, reuse, scaling, expressiveness, sizes or plot");
    metrics->add_option("--seed", f.seed, "mapping seed");
    metrics->add_option("--out", f.out, "report directory");

    corpus->add_option("dir", f.project, "corpus directory")->required();
    corpus->add_option("--seed", f.seed, "mapping seed");
    corpus->add_option("--out", f.out, "output root (default <dir>/out)");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("iotforge");
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*compile) return cmd_compile(f, out, err);
        if (*map) return cmd_map(f, out, err);
        if (*linkc) return cmd_link(f, out, err);
        if (*sim) return cmd_simulate(f, out, err);
        if (*metrics) return cmd_metrics(f, out, err);
        if (*corpus) return cmd_corpus(f, out, err);
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DiagnosticFailure& d) {
        err << format_diagnostics(d.diags);
        return kExitDiagnostics;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const SimError& e) {
        err << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}

}  // namespace iotforge
