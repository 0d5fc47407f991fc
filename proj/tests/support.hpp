#pragma once

#include <filesystem>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "iotforge/diagnostic.hpp"
#include "iotforge/project.hpp"

namespace iotforge::testing {

namespace fs = std::filesystem;

inline fs::path source_dir() { return fs::path(IOTFORGE_SOURCE_DIR); }
inline fs::path corpus_dir() { return source_dir() / "corpus"; }
inline fs::path app_dir(const std::string& app) { return corpus_dir() / app; }

inline std::vector<std::string> corpus_apps() {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(corpus_dir())) {
        if (fs::exists(e.path() / "spec" / "app.vocab")) out.push_back(e.path().filename().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

template <typename T>
T must(Outcome<T> o) {
    if (!o.ok()) throw std::runtime_error(format_diagnostics(o.diagnostics()));
    return std::move(o).value();
}

inline LoadedProject load_app(const std::string& app) { return must(load_project(ProjectLayout(app_dir(app)))); }

inline CompileArtifacts compile_app(const std::string& app, std::uint64_t seed = 42) {
    return must(compile_project(load_app(app), seed));
}

inline std::vector<SensorTrace> app_traces(const std::string& app) {
    AppConfig cfg = load_config(app_dir(app));
    std::vector<SensorTrace> out;
    if (!cfg.trace.empty()) out.push_back(must(parse_trace(read_file(cfg.trace), cfg.trace)));
    return out;
}

inline SimConfig app_sim_config(const std::string& app) {
    AppConfig cfg = load_config(app_dir(app));
    SimConfig sc;
    sc.horizon_ms = cfg.horizon_ms.value_or(0);
    sc.latency_ms = cfg.latency_ms;
    sc.request_latency_ms = cfg.request_latency_ms;
    sc.seed = cfg.seed;
    return sc;
}

/// Compile at the configured seed and run against the configured trace.
inline SimResult run_app(const std::string& app, const CompileArtifacts& art) {
    LoadedProject p = load_app(app);
    return simulate(art.linkset, app_traces(app), project_handlers(p), app_sim_config(app));
}

class TempDir {
public:
    TempDir() {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = fs::temp_directory_path() /
                ("iotforge-test-" + std::to_string(rd()) + "-" + std::to_string(++counter));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

/// Recursive copy of a corpus app into `dst`, without any out/ directory.
inline fs::path copy_app(const std::string& app, const fs::path& dst) {
    fs::path to = dst / app;
    fs::create_directories(to);
    for (const auto& e : fs::directory_iterator(app_dir(app))) {
        if (e.path().filename() == "out") continue;
        fs::copy(e.path(), to / e.path().filename(), fs::copy_options::recursive);
    }
    return to;
}

/// Every file below `dir`, keyed by relative path.
inline std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[e.path().lexically_relative(dir).generic_string()] = read_file(e.path());
    }
    return out;
}

// Grammar words a mutation may splice in, so mutants reach deep parser states.
inline const std::vector<std::string>& fuzz_tokens() {
    static const std::vector<std::string> t = {
        "vocabulary", "architecture", "deployment", "uses", "regions:", "datatypes:", "resources:", "sensor",
        "actuator", "storage", "datatype", "generate", "action", "accessed-by", "service", "scope:", "consume",
        "produce", "request", "command", "from", "to", "window", "every", "logic:", "builtin", "extern",
        "device", "region:", "platform:", "{", "}", "(", ")", ";", ":", ",", "=", "0", "-1", "4294967296",
        "99999999999999999999", "60", "s", "ms", "min", "double", "long", "string", "boolean", "//", "\"",
        "\n", "\t", "x", "Room", "@", "\xff", "1.5", "true"};
    return t;
}

/// One random edit: delete, duplicate, or replace a span, or splice in a token.
inline std::string mutate(std::string s, std::mt19937_64& rng) {
    auto pick = [&](std::size_t n) { return n == 0 ? std::size_t{0} : static_cast<std::size_t>(rng() % n); };
    int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits; ++e) {
        std::size_t pos = pick(s.size() + 1);
        std::size_t len = 1 + pick(12);
        switch (rng() % 5) {
            case 0: s.erase(pos, len); break;
            case 1: s.insert(pos, s.substr(pick(s.size() + 1), len)); break;
            case 2: s.insert(pos, fuzz_tokens()[pick(fuzz_tokens().size())]); break;
            case 3:
                if (pos < s.size()) s[pos] = static_cast<char>(rng() % 256);
                break;
            default:
                s.insert(pos, " " + fuzz_tokens()[pick(fuzz_tokens().size())] + " ");
                break;
        }
    }
    return s;
}

}  // namespace iotforge::testing
