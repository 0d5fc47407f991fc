#include "iotforge/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "iotforge/frontend.hpp"

namespace iotforge {

std::string_view concern_name(Concern c) {
    switch (c) {
        case Concern::Vocabulary: return "vocabulary";
        case Concern::Architecture: return "architecture";
        case Concern::Deployment: return "deployment";
        case Concern::Logic: return "logic";
        case Concern::Driver: return "driver";
    }
    return "vocabulary";
}

std::vector<fs::path> concern_files(const ProjectLayout& layout, Concern c) {
    switch (c) {
        case Concern::Vocabulary: return {layout.vocab()};
        case Concern::Architecture: return {layout.arch()};
        case Concern::Deployment: return {layout.deploy()};
        case Concern::Logic: return ProjectLayout::files_in(layout.logic_dir(), ".logic");
        case Concern::Driver: return ProjectLayout::files_in(layout.drivers_dir(), ".drivers");
    }
    return {};
}

namespace {

std::string_view trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\f\v");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\f\v");
    return s.substr(b, e - b + 1);
}

template <typename Fn>
void for_each_line(std::string_view text, Fn fn) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        fn(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
}

std::vector<std::string> concern_lines(const ProjectLayout& layout, Concern c) {
    std::vector<std::string> out;
    for (const auto& f : concern_files(layout, c)) {
        if (c == Concern::Logic || c == Concern::Driver) {
            if (!fs::exists(f)) continue;
        }
        auto lines = stripped_lines(read_file(f));
        out.insert(out.end(), lines.begin(), lines.end());
    }
    return out;
}

bool is_generated_artifact(const std::string& rel) {
    return rel.rfind("contracts/", 0) == 0 || rel.rfind("device/", 0) == 0;
}

}  // namespace

bool is_countable_line(std::string_view line) {
    auto t = trim(line);
    return !t.empty() && t.rfind("//", 0) != 0;
}

std::size_t count_loc_text(std::string_view text) {
    std::size_t n = 0;
    for_each_line(text, [&](std::string_view l) { n += is_countable_line(l); });
    return n;
}

std::size_t count_loc(const std::vector<fs::path>& files) {
    std::size_t n = 0;
    for (const auto& f : files) n += count_loc_text(read_file(f));
    return n;
}

std::vector<std::string> stripped_lines(std::string_view text) {
    std::vector<std::string> out;
    for_each_line(text, [&](std::string_view l) {
        if (is_countable_line(l)) out.emplace_back(trim(l));
    });
    return out;
}

std::size_t LocReport::handwritten_total() const {
    std::size_t n = 0;
    for (const auto& [c, v] : handwritten) n += v;
    return n;
}

LocReport loc_report(const ProjectLayout& layout, const std::map<std::string, std::string>& generated,
                     std::string app) {
    LocReport r;
    r.app = app.empty() ? layout.root.filename().string() : std::move(app);
    for (Concern c : kConcerns) r.handwritten[c] = count_loc(concern_files(layout, c));
    for (const auto& [rel, content] : generated) {
        if (!is_generated_artifact(rel)) continue;
        r.generated_lines += count_loc_text(content);
        r.generated_bytes += content.size();
        ++r.generated_files;
    }
    return r;
}

double generation_ratio(const LocReport& r) {
    double gen = static_cast<double>(r.generated_lines);
    double total = gen + static_cast<double>(r.handwritten_total());
    return total == 0.0 ? 0.0 : gen / total;
}

LineDiff diff_lines(const std::vector<std::string>& base, const std::vector<std::string>& variant) {
    const std::size_t n = base.size(), m = variant.size();
    std::vector<std::vector<std::size_t>> lcs(n + 1, std::vector<std::size_t>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            lcs[i][j] = base[i] == variant[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
        }
    }
    return LineDiff{m - lcs[0][0], n - lcs[0][0]};
}

ReuseReport reuse_report(const ProjectLayout& base, const ProjectLayout& variant) {
    for (const auto* l : {&base, &variant}) {
        for (const auto& p : {l->vocab(), l->arch(), l->deploy()}) {
            if (!fs::is_regular_file(p)) throw IoError("project layout violation: missing '" + p.string() + "'");
        }
    }
    ReuseReport r;
    r.base = base.root.filename().string();
    r.variant = variant.root.filename().string();
    for (Concern c : kConcerns) r.diffs[c] = diff_lines(concern_lines(base, c), concern_lines(variant, c));
    return r;
}

DeploymentSpec synthesize_deployment(const DeploymentSpec& base, const ScalingConfig& s, int n) {
    DeploymentSpec d;
    d.name = base.name;
    d.vocabulary_name = base.vocabulary_name;
    const int per_cell = std::max<int>(1, static_cast<int>(s.roster.size()));
    for (int i = 0; i < n; ++i) {
        DeviceDecl dev;
        dev.name = "Unit" + std::to_string(i + 1);
        dev.coords = s.fixed;
        dev.coords.push_back(RegionCoord{s.region, i / per_cell + 1, {}});
        dev.resources.push_back(s.roster.empty() ? std::string() : s.roster[i % per_cell]);
        dev.resource_spans.emplace_back();
        dev.platform = s.platform;
        d.devices.push_back(std::move(dev));
    }
    return d;
}

Outcome<ScalingSeries> scaling_series(const ProjectLayout& layout, const ScalingConfig& s,
                                      const std::vector<int>& counts, std::uint64_t seed) {
    auto fail = [](std::string msg) { return std::vector<Diagnostic>{Diagnostic{{}, Severity::Error, std::move(msg)}}; };
    if (s.roster.empty() || s.region.empty()) return fail("scaling needs a region and a non-empty roster");
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] <= 0) return fail("device counts must be positive");
        if (i > 0 && counts[i] <= counts[i - 1]) return fail("device counts must be strictly increasing");
    }
    auto loaded = load_project(layout);
    if (!loaded.ok()) return loaded.diagnostics();
    ScalingSeries series;
    series.app = layout.root.filename().string();
    for (int n : counts) {
        std::string text = print_deployment(synthesize_deployment(loaded.value().deployment, s, n));
        std::string file = "synthesized/" + std::to_string(n) + ".deploy";
        auto dep = parse_deployment(text, file);
        if (!dep.ok()) return dep.diagnostics();
        LoadedProject p = loaded.value();
        p.deployment = std::move(dep).value();
        auto art = compile_project(p, seed);
        if (!art.ok()) return art.diagnostics();
        ScalingRow row;
        row.devices = n;
        row.loc = loc_report(layout, art.value().files, series.app);
        row.loc.handwritten[Concern::Deployment] = count_loc_text(text);
        series.rows.push_back(std::move(row));
    }
    return series;
}

bool exactly_affine(const std::vector<std::pair<long long, long long>>& points) {
    if (points.size() < 3) return true;
    auto [x0, y0] = points[0];
    auto [x1, y1] = points[1];
    if (x0 == x1) return false;
    for (const auto& [x, y] : points) {
        if ((y - y0) * (x1 - x0) != (y1 - y0) * (x - x0)) return false;
    }
    return true;
}

ExpressivenessRow expressiveness_row(const ResolvedApp& r, const AppConfig& cfg) {
    ExpressivenessRow row;
    row.app = cfg.name.empty() ? r.architecture.name : cfg.name;
    row.behavior = cfg.behavior;
    row.domain = cfg.domain;
    row.services = r.architecture.services.size();
    std::set<std::string> used;
    for (const auto& d : r.deployment.devices) used.insert(d.resources.begin(), d.resources.end());
    row.resource_types = used.size();
    row.instances = r.instances.size();
    for (const auto& s : r.architecture.services) {
        for (const auto& c : s.consumes) row.modes.insert(c.period_ms ? "periodic" : "event-driven");
        if (!s.requests.empty()) row.modes.insert("request-response");
        if (!s.commands.empty()) row.modes.insert("command");
    }
    row.network_size = r.deployment.devices.size();
    return row;
}

std::vector<PackageSizeRow> package_sizes(const std::string& app, const Linkset& ls) {
    std::vector<PackageSizeRow> out;
    for (const auto& p : ls.packages) out.push_back(PackageSizeRow{app, p.device, p.tasks.size(), package_size(p)});
    return out;
}

double task_coverage(const Linkset& ls, const SimResult& result) {
    std::size_t total = 0, active = 0;
    for (const auto& p : ls.packages) {
        for (const auto& t : p.tasks) {
            ++total;
            auto it = result.received.find(t.instance.label());
            if (it == result.received.end()) continue;
            bool any = std::any_of(it->second.begin(), it->second.end(), [](const auto& kv) { return kv.second > 0; });
            active += any;
        }
    }
    return total == 0 ? 1.0 : static_cast<double>(active) / static_cast<double>(total);
}

// ------------------------------------------------------------------ writers

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string join_modes(const std::set<std::string>& modes) {
    std::string out;
    for (const char* m : kModeNames) {
        if (!modes.count(m)) continue;
        out += (out.empty() ? "" : ", ") + std::string(m);
    }
    return out;
}

std::string md_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string loc_csv(const std::vector<LocReport>& reports) {
    std::string out = "concern,app,loc\n";
    for (const auto& r : reports) {
        for (Concern c : kConcerns) {
            out += std::string(concern_name(c)) + "," + csv_field(r.app) + "," + std::to_string(r.handwritten.at(c)) + "\n";
        }
        out += "generated," + csv_field(r.app) + "," + std::to_string(r.generated_lines) + "\n";
    }
    return out;
}

std::string reuse_csv(const std::vector<ReuseReport>& reports) {
    std::string out = "base,variant,concern,added,removed,changed,reused\n";
    for (const auto& r : reports) {
        for (Concern c : kConcerns) {
            const LineDiff& d = r.diffs.at(c);
            out += csv_field(r.base) + "," + csv_field(r.variant) + "," + std::string(concern_name(c)) + "," +
                   std::to_string(d.added) + "," + std::to_string(d.removed) + "," + std::to_string(d.changed()) +
                   "," + (r.reused(c) ? "true" : "false") + "\n";
        }
    }
    return out;
}

std::string scaling_csv(const ScalingSeries& series) {
    std::string out = "app,devices,vocabulary,architecture,deployment,logic,driver,generated,ratio\n";
    for (const auto& row : series.rows) {
        out += csv_field(series.app) + "," + std::to_string(row.devices);
        for (Concern c : kConcerns) out += "," + std::to_string(row.loc.handwritten.at(c));
        out += "," + std::to_string(row.loc.generated_lines) + "," + fixed(generation_ratio(row.loc), 4) + "\n";
    }
    return out;
}

std::string expressiveness_md(const std::vector<ExpressivenessRow>& rows) {
    std::string out =
        "| Application | Behavior | Domain | Components | Interaction modes | Topology | Network size |\n"
        "|---|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        std::string components = std::to_string(r.services) + " services, " + std::to_string(r.resource_types) +
                                 " resource types, " + std::to_string(r.instances) + " instances";
        out += "| " + md_cell(r.app) + " | " + md_cell(r.behavior) + " | " + md_cell(r.domain) + " | " + components +
               " | " + join_modes(r.modes) + " | " + r.topology + " | " + std::to_string(r.network_size) + " |\n";
    }
    return out;
}

std::string package_sizes_csv(const std::vector<PackageSizeRow>& rows) {
    std::string out = "app,device,tasks,bytes\n";
    for (const auto& r : rows) {
        out += csv_field(r.app) + "," + csv_field(r.device) + "," + std::to_string(r.tasks) + "," +
               std::to_string(r.bytes) + "\n";
    }
    return out;
}

std::string scaling_svg(const ScalingSeries& series) {
    const double w = 640, h = 400, left = 60, right = 150, top = 30, bottom = 50;
    double max_x = 1, max_y = 1;
    for (const auto& row : series.rows) {
        max_x = std::max(max_x, static_cast<double>(row.devices));
        for (Concern c : kConcerns) max_y = std::max(max_y, static_cast<double>(row.loc.handwritten.at(c)));
    }
    auto px = [&](double x) { return left + x / max_x * (w - left - right); };
    auto py = [&](double y) { return h - bottom - y / max_y * (h - top - bottom); };
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    svg << "<text x=\"" << left << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">Handwritten lines per concern: "
        << series.app << "</text>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << px(max_x) << "\" y2=\"" << py(0)
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << left << "\" y2=\"" << py(max_y)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(max_x / 2) << "\" y=\"" << h - 12 << "\" font-family=\"sans-serif\" font-size=\"12\">devices</text>\n";
    svg << "<text x=\"8\" y=\"" << py(max_y) << "\" font-family=\"sans-serif\" font-size=\"12\">" << max_y << "</text>\n";
    for (const auto& row : series.rows) {
        svg << "<text x=\"" << px(row.devices) - 8 << "\" y=\"" << py(0) + 16
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << row.devices << "</text>\n";
    }
    int k = 0;
    for (Concern c : kConcerns) {
        std::string points;
        for (const auto& row : series.rows) {
            points += fixed(px(row.devices), 1) + "," + fixed(py(static_cast<double>(row.loc.handwritten.at(c))), 1) + " ";
        }
        svg << "<polyline fill=\"none\" stroke=\"" << colors[k] << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
        svg << "<text x=\"" << w - right + 10 << "\" y=\"" << top + 20 * (k + 1) << "\" fill=\"" << colors[k]
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << concern_name(c) << "</text>\n";
        ++k;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace iotforge
