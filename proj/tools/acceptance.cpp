// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "iotforge/cli.hpp"
#include "iotforge/frontend.hpp"
#include "iotforge/metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace iotforge;
using namespace iotforge::testing;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int cli(const std::vector<std::string>& args, std::string* err = nullptr) {
    std::vector<std::string> argv = {"iotforge"};
    argv.insert(argv.end(), args.begin(), args.end());
    std::ostringstream out, e;
    int code = run_cli(argv, out, e);
    if (err) *err = e.str();
    return code;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Verdict end_to_end_fire() {
    TempDir tmp;
    fs::path app = copy_app("fire-bedroom", tmp.path());
    auto t0 = Clock::now();
    std::string err;
    if (int c = cli({"compile", app.string(), "--seed", "42"}, &err); c != 0) return {false, "compile exit " + std::to_string(c) + ": " + err};
    if (int c = cli({"simulate", app.string()}, &err); c != 0) return {false, "simulate exit " + std::to_string(c) + ": " + err};
    std::string first = read_file(app / "out/actuation.log");
    if (int c = cli({"simulate", app.string()}, &err); c != 0) return {false, "second simulate failed: " + err};
    std::string second = read_file(app / "out/actuation.log");
    double elapsed = seconds_since(t0);

    LoadedProject p = load_app("fire-bedroom");
    AppConfig cfg = load_config(app_dir("fire-bedroom"));
    auto expect = fire_oracle(p.deployment, app_traces("fire-bedroom")[0], cfg.horizon_ms.value_or(0), cfg.latency_ms);
    std::vector<ExpectedActuation> got;
    bool only_activate = true;
    std::set<std::string> room1_alarms;
    for (const auto& d : p.deployment.devices) {
        if (d.hosts("Alarm") && d.coord("Room") == 1) room1_alarms.insert(d.name);
    }
    std::set<std::string> hit;
    std::istringstream lines(first);
    for (std::string line; std::getline(lines, line);) {
        auto j = nlohmann::json::parse(line);
        got.push_back(ExpectedActuation{j.at("t").get<std::int64_t>(), j.at("device").get<std::string>()});
        only_activate = only_activate && j.at("action") == "activate";
        hit.insert(j.at("device").get<std::string>());
    }
    bool ok = got == expect && !expect.empty() && only_activate && hit == room1_alarms && first == second &&
              elapsed < 5.0;
    std::string when = expect.empty() ? "none" : std::to_string(expect.front().t) + " ms";
    return {ok, "oracle trigger " + when + ", " + std::to_string(got.size()) + " activate(s) on room-1 alarms, identical reruns " +
                    (first == second ? "yes" : "no") + ", " + fmt("%.2f s (< 5 s)", elapsed)};
}

Verdict reuse_pattern() {
    ProjectLayout base(app_dir("fire-bedroom"));
    bool ok = true;
    std::string detail;
    for (const char* v : {"fire-kitchen", "fire-meeting"}) {
        ReuseReport r = reuse_report(base, ProjectLayout(app_dir(v)));
        std::string row;
        for (Concern c : kConcerns) {
            std::size_t n = r.diffs.at(c).changed();
            row += (row.empty() ? "" : "/") + std::to_string(n);
            ok = ok && (c == Concern::Deployment ? n > 0 : n == 0);
        }
        detail += std::string(detail.empty() ? "" : "; ") + v + " " + row;
    }
    return {ok, detail + " (vocab/arch/deploy/logic/driver, exact zero elsewhere)"};
}

Verdict evolving_functionality() {
    AppConfig cfg = load_config(app_dir("heating-control"));
    bool ok = !cfg.baselines.empty();
    std::string detail;
    for (const auto& b : cfg.baselines) {
        ReuseReport r = reuse_report(ProjectLayout(app_dir(b)), ProjectLayout(app_dir("heating-control")));
        auto ch = [&](Concern c) { return r.diffs.at(c).changed(); };
        ok = ok && ch(Concern::Vocabulary) == 0 && ch(Concern::Driver) == 0 && ch(Concern::Logic) > 0 &&
             ch(Concern::Architecture) > 0;
        detail += (detail.empty() ? "" : "; ") + b + " vocab=" + std::to_string(ch(Concern::Vocabulary)) +
                  " driver=" + std::to_string(ch(Concern::Driver)) + " arch=" + std::to_string(ch(Concern::Architecture)) +
                  " logic=" + std::to_string(ch(Concern::Logic));
    }
    return {ok, detail};
}

Verdict scaling_law() {
    ProjectLayout layout(app_dir("road-traffic"));
    AppConfig cfg = load_config(layout.root);
    if (!cfg.scaling) return {false, "road-traffic has no scaling section"};
    const std::vector<int> counts = {6, 12, 24, 48, 96};
    auto t0 = Clock::now();
    auto s = scaling_series(layout, *cfg.scaling, counts, cfg.seed);
    double elapsed = seconds_since(t0);
    if (!s.ok()) return {false, format_diagnostics(s.diagnostics())};
    const auto& rows = s.value().rows;
    bool constant = true;
    for (const auto& r : rows) {
        for (Concern c : {Concern::Vocabulary, Concern::Architecture, Concern::Logic}) {
            constant = constant && r.loc.handwritten.at(c) == rows[0].loc.handwritten.at(c);
        }
    }
    std::vector<std::pair<long long, long long>> pts;
    std::string dep;
    for (const auto& r : rows) {
        pts.emplace_back(r.devices, static_cast<long long>(r.loc.handwritten.at(Concern::Deployment)));
        dep += (dep.empty() ? "" : ",") + std::to_string(pts.back().second);
    }
    bool affine = exactly_affine(pts);
    bool ok = rows.size() == counts.size() && constant && affine && elapsed < 10.0;
    return {ok, std::string("vocab/arch/logic constant ") + (constant ? "yes" : "no") + ", deployment [" + dep +
                    "] affine " + (affine ? "yes" : "no") + ", " + fmt("%.2f s (< 10 s)", elapsed)};
}

Verdict generated_dominance() {
    bool ok = true;
    std::string detail;
    for (const char* app : {"fire-bedroom", "hvac"}) {
        CompileArtifacts art = compile_app(app);
        double ratio = generation_ratio(loc_report(ProjectLayout(app_dir(app)), art.files));
        ok = ok && ratio >= 0.6;
        detail += std::string(detail.empty() ? "" : ", ") + app + " ratio " + fmt("%.3f", ratio);
    }
    std::size_t tasks = 0;
    double executed = 0;
    for (const auto& app : corpus_apps()) {
        CompileArtifacts art = compile_app(app);
        std::size_t n = 0;
        for (const auto& p : art.linkset.packages) n += p.tasks.size();
        executed += task_coverage(art.linkset, run_app(app, art)) * static_cast<double>(n);
        tasks += n;
    }
    double coverage = tasks ? executed / static_cast<double>(tasks) : 1.0;
    ok = ok && coverage >= 0.8;
    return {ok, detail + " (>= 0.6); task coverage " + fmt("%.3f", coverage) + " over " + std::to_string(tasks) +
                    " bindings (>= 0.8)"};
}

Verdict mapper_properties() {
    std::size_t checked = 0, bad = 0;
    for (const auto& app : corpus_apps()) {
        LoadedProject p = load_app(app);
        ResolvedApp r = must(resolve(p.vocabulary, p.architecture, p.deployment));
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            auto m = map_random(r, seed);
            ++checked;
            if (!m.ok() || !validate_mapping(m.value(), r).empty()) ++bad;
        }
    }
    TempDir a, b;
    fs::path pa = copy_app("road-traffic", a.path()), pb = copy_app("road-traffic", b.path());
    bool same = cli({"compile", pa.string(), "--seed", "42"}) == 0 && cli({"compile", pb.string(), "--seed", "42"}) == 0 &&
                read_file(pa / "out/mapping.json") == read_file(pb / "out/mapping.json");

    std::string d = "deployment D uses Building\n";
    for (int i = 1; i <= 4; ++i) {
        d += "device T" + std::to_string(i) + " { region: Building = 1, Room = 1; resources: TemperatureSensor; platform: P; }\n";
    }
    ResolvedApp r = must(resolve(must(parse_vocabulary(kBuildingVocab, "v")), must(parse_architecture(kAvgArch, "a")),
                                 must(parse_deployment(d, "d"))));
    std::map<std::string, int> counts;
    const int n = 10000;
    for (int seed = 0; seed < n; ++seed) ++counts[must(map_random(r, static_cast<std::uint64_t>(seed))).assignments.at(0).device];
    double lo = 1.0, hi = 0.0;
    for (const auto& [dev, c] : counts) {
        double f = static_cast<double>(c) / n;
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    bool uniform = counts.size() == 4 && lo >= 0.22 && hi <= 0.28;
    return {bad == 0 && same && uniform,
            std::to_string(checked) + " mappings, " + std::to_string(bad) + " invalid; seed 42 reproducible " +
                (same ? "yes" : "no") + "; frequencies in [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) +
                "] (25% +- 3%)"};
}

Verdict expressiveness() {
    const std::map<std::string, std::size_t> expect = {
        {"hvac", 5}, {"fire-bedroom", 8}, {"safety-kitchen", 5}, {"avg-temp", 16}, {"road-traffic", 24}};
    std::set<std::string> modes;
    bool ok = true, static_all = true;
    std::string detail;
    for (const auto& app : corpus_apps()) {
        AppConfig cfg = load_config(app_dir(app));
        if (!cfg.matrix) continue;
        ExpressivenessRow row = expressiveness_row(compile_app(app).resolved, cfg);
        modes.insert(row.modes.begin(), row.modes.end());
        static_all = static_all && row.topology == "static";
        auto it = expect.find(app);
        if (it != expect.end()) {
            ok = ok && row.network_size == it->second;
            detail += (detail.empty() ? "" : ", ") + app + "=" + std::to_string(row.network_size);
        }
    }
    for (const auto& [app, n] : expect) {
        if (detail.find(app + "=") == std::string::npos) ok = false;
    }
    std::set<std::string> all(std::begin(kModeNames), std::end(kModeNames));
    ok = ok && modes == all && static_all;
    return {ok, "sizes " + detail + "; modes " + std::to_string(modes.size()) + "/4; topology static " +
                    (static_all ? "yes" : "no")};
}

Verdict determinism() {
    TempDir tmp;
    bool ok = true;
    std::size_t files = 0;
    for (const auto& app : corpus_apps()) {
        fs::path dir = copy_app(app, tmp.path());
        ok = ok && cli({"compile", dir.string()}) == 0;
        auto first = snapshot(dir / "out");
        ok = ok && cli({"compile", dir.string()}) == 0 && snapshot(dir / "out") == first;
        files += first.size();
        ok = ok && cli({"simulate", dir.string()}) == 0;
        std::string log = read_file(dir / "out/actuation.log");
        ok = ok && cli({"simulate", dir.string()}) == 0 && read_file(dir / "out/actuation.log") == log;
    }
    return {ok, std::to_string(corpus_apps().size()) + " apps, " + std::to_string(files) +
                    " output files byte-identical across compiles; logs identical across simulates"};
}

Verdict frontend_robustness() {
    std::vector<std::pair<int, std::string>> bases;
    for (const auto& app : corpus_apps()) {
        bases.emplace_back(0, read_file(app_dir(app) / "spec/app.vocab"));
        bases.emplace_back(1, read_file(app_dir(app) / "spec/app.arch"));
        bases.emplace_back(2, read_file(app_dir(app) / "spec/app.deploy"));
    }
    std::mt19937_64 rng(20240601);
    const int n = 12000;
    int parsed = 0, diagnosed = 0, crashed = 0;
    for (int i = 0; i < n; ++i) {
        const auto& [kind, text] = bases[static_cast<std::size_t>(i) % bases.size()];
        std::string m = mutate(text, rng);
        try {
            bool ok = false, has_diag = false;
            if (kind == 0) {
                auto r = parse_vocabulary(m, "m");
                ok = r.ok();
                has_diag = !ok && !r.diagnostics().empty();
            } else if (kind == 1) {
                auto r = parse_architecture(m, "m");
                ok = r.ok();
                has_diag = !ok && !r.diagnostics().empty();
            } else {
                auto r = parse_deployment(m, "m");
                ok = r.ok();
                has_diag = !ok && !r.diagnostics().empty();
            }
            if (ok) ++parsed;
            else if (has_diag) ++diagnosed;
            else ++crashed;
        } catch (...) {
            ++crashed;
        }
    }
    int round_trips = 0, round_fail = 0;
    for (const auto& app : corpus_apps()) {
        fs::path s = app_dir(app) / "spec";
        auto v = must(parse_vocabulary(read_file(s / "app.vocab"), "v"));
        auto a = must(parse_architecture(read_file(s / "app.arch"), "a"));
        auto d = must(parse_deployment(read_file(s / "app.deploy"), "d"));
        auto v2 = parse_vocabulary(print_vocabulary(v), "v2");
        auto a2 = parse_architecture(print_architecture(a), "a2");
        auto d2 = parse_deployment(print_deployment(d), "d2");
        round_trips += 3;
        round_fail += !(v2.ok() && same_structure(v, v2.value()));
        round_fail += !(a2.ok() && same_structure(a, a2.value()));
        round_fail += !(d2.ok() && same_structure(d, d2.value()));
    }
    return {crashed == 0 && round_fail == 0 && parsed + diagnosed >= 10000,
            std::to_string(n) + " mutants: " + std::to_string(parsed) + " parsed, " + std::to_string(diagnosed) +
                " diagnosed, " + std::to_string(crashed) + " crashed; round trip " +
                std::to_string(round_trips - round_fail) + "/" + std::to_string(round_trips)};
}

Verdict package_sizes_reported() {
    TempDir tmp;
    fs::path fire = copy_app("fire-bedroom", tmp.path()), hvac = copy_app("hvac", tmp.path());
    fs::path reports = tmp.path() / "reports";
    if (cli({"metrics", fire.string(), hvac.string(), "--kind", "sizes", "--out", reports.string()}) != 0) {
        return {false, "metrics --kind sizes failed"};
    }
    std::istringstream csv(read_file(reports / "package-sizes.csv"));
    std::string line;
    std::getline(csv, line);
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_app;  // rows, bytes
    bool positive = true;
    while (std::getline(csv, line)) {
        auto c1 = line.find(','), c3 = line.rfind(',');
        std::string app = line.substr(0, c1);
        std::size_t bytes = std::stoul(line.substr(c3 + 1));
        positive = positive && bytes > 0;
        per_app[app].first++;
        per_app[app].second += bytes;
    }
    bool ok = positive && per_app["fire-bedroom"].first == 8 && per_app["hvac"].first == 5;
    std::string detail;
    for (const auto& [app, v] : per_app) {
        detail += (detail.empty() ? "" : ", ") + app + " " + std::to_string(v.first) + " packages, mean " +
                  std::to_string(v.second / std::max<std::size_t>(1, v.first)) + " B";
    }
    return {ok, detail + " (reported, not compared)"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"end-to-end fire detection", end_to_end_fire},
        {"reuse pattern of fire variants", reuse_pattern},
        {"evolving functionality", evolving_functionality},
        {"scaling law", scaling_law},
        {"generated-code dominance", generated_dominance},
        {"mapper properties", mapper_properties},
        {"expressiveness matrix", expressiveness},
        {"determinism and idempotence", determinism},
        {"frontend robustness", frontend_robustness},
        {"package-size reporting", package_sizes_reported},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        failed += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << v.detail << "\n";
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
