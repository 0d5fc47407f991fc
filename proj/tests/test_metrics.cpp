#include "doctest.h"
#include "iotforge/metrics.hpp"
#include "support.hpp"

using namespace iotforge;
using namespace iotforge::testing;

namespace {

ScalingSeries road_series(const std::vector<int>& counts) {
    ProjectLayout layout(app_dir("road-traffic"));
    AppConfig cfg = load_config(layout.root);
    REQUIRE(cfg.scaling.has_value());
    return must(scaling_series(layout, *cfg.scaling, counts, cfg.seed));
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("line counting rule") {
    CHECK(count_loc_text("a;\n\nb;\n  // note\n\nc;\n") == 3);
    CHECK(count_loc_text("") == 0);
    CHECK(count_loc_text("   \n\t\n") == 0);
    CHECK(count_loc_text("x; // trailing comment still counts\n") == 1);
    CHECK(count_loc_text("no newline at end") == 1);
}

TEST_CASE("fire deployment hand count") {
    // one header line plus eight five-line device blocks; the comment and
    // blank separators do not count
    CHECK(count_loc({app_dir("fire-bedroom") / "spec/app.deploy"}) == 1 + 8 * 5);
}

TEST_CASE("count_loc is permutation-invariant and additive") {
    fs::path s = app_dir("hvac") / "spec";
    std::vector<fs::path> a = {s / "app.vocab", s / "app.arch"};
    std::vector<fs::path> b = {s / "app.deploy"};
    std::vector<fs::path> all = {s / "app.deploy", s / "app.vocab", s / "app.arch"};
    std::vector<fs::path> rev(all.rbegin(), all.rend());
    CHECK(count_loc(all) == count_loc(rev));
    CHECK(count_loc(all) == count_loc(a) + count_loc(b));
    CHECK_THROWS_AS(count_loc({s / "missing.vocab"}), IoError);
}

TEST_CASE("line diff") {
    CHECK(diff_lines({"a", "b", "c"}, {"a", "b", "c"}).changed() == 0);
    LineDiff d = diff_lines({"a", "b", "c"}, {"a", "x", "c"});
    CHECK(d.added == 1);
    CHECK(d.removed == 1);
    LineDiff ins = diff_lines({"a", "c"}, {"a", "b", "c", "d"});
    CHECK(ins.added == 2);
    CHECK(ins.removed == 0);
    CHECK(diff_lines({}, {"a"}).added == 1);
    CHECK(diff_lines({"a"}, {}).removed == 1);
}

TEST_CASE("fire variants reuse everything but the deployment") {
    ProjectLayout base(app_dir("fire-bedroom"));
    for (const char* variant : {"fire-kitchen", "fire-meeting"}) {
        CAPTURE(variant);
        ReuseReport r = reuse_report(base, ProjectLayout(app_dir(variant)));
        CHECK(r.diffs.at(Concern::Vocabulary).changed() == 0);
        CHECK(r.diffs.at(Concern::Architecture).changed() == 0);
        CHECK(r.diffs.at(Concern::Logic).changed() == 0);
        CHECK(r.diffs.at(Concern::Driver).changed() == 0);
        CHECK(r.diffs.at(Concern::Deployment).changed() > 0);
    }
}

TEST_CASE("an app against itself") {
    ProjectLayout p(app_dir("hvac"));
    ReuseReport r = reuse_report(p, p);
    for (Concern c : kConcerns) CHECK(r.reused(c));
}

TEST_CASE("zero change is symmetric") {
    auto apps = corpus_apps();
    for (const auto& a : apps) {
        for (const auto& b : apps) {
            ReuseReport ab = reuse_report(ProjectLayout(app_dir(a)), ProjectLayout(app_dir(b)));
            ReuseReport ba = reuse_report(ProjectLayout(app_dir(b)), ProjectLayout(app_dir(a)));
            for (Concern c : kConcerns) {
                CHECK(ab.reused(c) == ba.reused(c));
                CHECK(ab.diffs.at(c).added == ba.diffs.at(c).removed);
            }
        }
    }
}

TEST_CASE("heating control keeps vocabulary and drivers") {
    AppConfig cfg = load_config(app_dir("heating-control"));
    REQUIRE(cfg.baselines.size() == 3);
    for (const auto& b : cfg.baselines) {
        CAPTURE(b);
        ReuseReport r = reuse_report(ProjectLayout(app_dir(b)), ProjectLayout(app_dir("heating-control")));
        CHECK(r.diffs.at(Concern::Vocabulary).changed() == 0);
        CHECK(r.diffs.at(Concern::Driver).changed() == 0);
        CHECK(r.diffs.at(Concern::Architecture).changed() > 0);
        CHECK(r.diffs.at(Concern::Logic).changed() > 0);
    }
}

TEST_CASE("layout violation") {
    TempDir tmp;
    CHECK_THROWS_AS(reuse_report(ProjectLayout(tmp.path()), ProjectLayout(app_dir("hvac"))), IoError);
}

TEST_CASE("scaling: constant concerns, growing deployment") {
    ScalingSeries s = road_series({6, 12, 24});
    REQUIRE(s.rows.size() == 3);
    for (const auto& row : s.rows) {
        CHECK(row.loc.handwritten.at(Concern::Vocabulary) == s.rows[0].loc.handwritten.at(Concern::Vocabulary));
        CHECK(row.loc.handwritten.at(Concern::Architecture) == s.rows[0].loc.handwritten.at(Concern::Architecture));
        CHECK(row.loc.handwritten.at(Concern::Logic) == s.rows[0].loc.handwritten.at(Concern::Logic));
        CHECK(row.loc.handwritten.at(Concern::Driver) == s.rows[0].loc.handwritten.at(Concern::Driver));
    }
    for (std::size_t i = 1; i < s.rows.size(); ++i) {
        CHECK(s.rows[i].loc.handwritten.at(Concern::Deployment) > s.rows[i - 1].loc.handwritten.at(Concern::Deployment));
    }
}

TEST_CASE("scaling: one count, bad counts") {
    CHECK(road_series({6}).rows.size() == 1);
    ProjectLayout layout(app_dir("road-traffic"));
    ScalingConfig sc = *load_config(layout.root).scaling;
    CHECK_FALSE(scaling_series(layout, sc, {12, 6}, 42).ok());
    CHECK_FALSE(scaling_series(layout, sc, {0}, 42).ok());
}

TEST_CASE("synthesized deployment lines are affine in device count") {
    ScalingSeries s = road_series({6, 12, 24, 48, 96});
    std::vector<std::pair<long long, long long>> pts;
    for (const auto& r : s.rows) pts.emplace_back(r.devices, static_cast<long long>(r.loc.handwritten.at(Concern::Deployment)));
    CHECK(exactly_affine(pts));
    // one header line plus a five-line block per device
    for (const auto& [n, loc] : pts) CHECK(loc == 1 + 5 * n);
}

TEST_CASE("exactly_affine") {
    CHECK(exactly_affine({{1, 3}, {2, 5}, {4, 9}}));
    CHECK_FALSE(exactly_affine({{1, 3}, {2, 5}, {4, 10}}));
    CHECK(exactly_affine({{1, 1}, {2, 2}}));
    CHECK_FALSE(exactly_affine({{1, 1}, {1, 2}, {3, 3}}));
}

TEST_CASE("generated share") {
    for (const char* app : {"fire-bedroom", "hvac"}) {
        CAPTURE(app);
        CompileArtifacts art = compile_app(app);
        LocReport r = loc_report(ProjectLayout(app_dir(app)), art.files);
        double ratio = generation_ratio(r);
        CHECK(ratio >= 0.6);
        CHECK(ratio <= 1.0);
        CHECK(r.generated_files == art.linkset.packages.size() + 2);
    }
    LocReport empty;
    CHECK(generation_ratio(empty) == 0.0);
}

TEST_CASE("zero devices still yield a ratio") {
    LoadedProject p = load_app("fire-bedroom");
    p.deployment.devices.clear();
    CompileArtifacts art = must(compile_project(p, 42));
    LocReport r = loc_report(ProjectLayout(app_dir("fire-bedroom")), art.files);
    double ratio = generation_ratio(r);
    CHECK(ratio >= 0.0);
    CHECK(ratio <= 1.0);
}

TEST_CASE("generated share does not fall as devices grow") {
    ScalingSeries s = road_series({6, 12, 24, 48, 96});
    for (std::size_t i = 1; i < s.rows.size(); ++i) {
        CHECK(generation_ratio(s.rows[i].loc) >= generation_ratio(s.rows[i - 1].loc));
    }
}

TEST_CASE("expressiveness rows") {
    CompileArtifacts fire = compile_app("fire-bedroom");
    ExpressivenessRow f = expressiveness_row(fire.resolved, load_config(app_dir("fire-bedroom")));
    CHECK(f.network_size == 8);
    CHECK(f.topology == "static");
    CHECK(f.modes == std::set<std::string>{"command", "event-driven", "periodic"});
    CHECK(f.services == 3);

    CompileArtifacts road = compile_app("road-traffic");
    CHECK(expressiveness_row(road.resolved, load_config(app_dir("road-traffic"))).network_size == 24);

    CompileArtifacts hvac = compile_app("hvac");
    CHECK(expressiveness_row(hvac.resolved, load_config(app_dir("hvac"))).modes.count("request-response") == 1);

    std::string md = expressiveness_md({});
    CHECK(md.find('|') != std::string::npos);
    CHECK(std::count(md.begin(), md.end(), '\n') == 2);  // header and rule only
}

TEST_CASE("package sizes and coverage") {
    for (const char* app : {"fire-bedroom", "hvac"}) {
        CAPTURE(app);
        CompileArtifacts art = compile_app(app);
        auto rows = package_sizes(app, art.linkset);
        CHECK(rows.size() == art.linkset.packages.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(rows[i].bytes == package_size(art.linkset.packages[i]));
            CHECK(rows[i].tasks == art.linkset.packages[i].tasks.size());
        }
        CHECK(task_coverage(art.linkset, run_app(app, art)) >= 0.8);
    }
    CHECK(task_coverage(Linkset{}, SimResult{}) == 1.0);
}

TEST_CASE("report writers") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    ProjectLayout base(app_dir("fire-bedroom"));
    std::string reuse = reuse_csv({reuse_report(base, ProjectLayout(app_dir("fire-kitchen")))});
    CHECK(reuse.rfind("base,variant,concern,added,removed,changed,reused\n", 0) == 0);
    CHECK(reuse.find("fire-bedroom,fire-kitchen,vocabulary,0,0,0,true\n") != std::string::npos);
    CHECK(reuse.find("fire-bedroom,fire-kitchen,deployment,") != std::string::npos);
    ScalingSeries s = road_series({6, 12});
    std::string csv = scaling_csv(s);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    std::string svg = scaling_svg(s);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
}

}  // TEST_SUITE
