/// @file metrics.hpp
/// @brief Development-effort instruments: line counts per concern, the
/// generated share, reuse diffs between app versions, scaling series over
/// synthesized deployments, the expressiveness table, and package sizes.
///
/// A line counts iff it is non-blank and not comment-only (`//`).

#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "iotforge/project.hpp"
#include "iotforge/runtime.hpp"

namespace iotforge {

enum class Concern { Vocabulary, Architecture, Deployment, Logic, Driver };
inline constexpr Concern kConcerns[] = {Concern::Vocabulary, Concern::Architecture, Concern::Deployment,
                                        Concern::Logic, Concern::Driver};

std::string_view concern_name(Concern c);
std::vector<fs::path> concern_files(const ProjectLayout& layout, Concern c);

bool is_countable_line(std::string_view line);
std::size_t count_loc_text(std::string_view text);
/// Sum over files; throws IoError on an unreadable file.
std::size_t count_loc(const std::vector<fs::path>& files);
/// Countable lines with surrounding whitespace removed.
std::vector<std::string> stripped_lines(std::string_view text);

struct LocReport {
    std::string app;
    std::map<Concern, std::size_t> handwritten;
    std::size_t generated_lines = 0;
    std::size_t generated_bytes = 0;
    std::size_t generated_files = 0;

    std::size_t handwritten_total() const;
};

/// Handwritten counts from the project; generated counts from the contract
/// and package files in `generated` (paths relative to `out/`).
LocReport loc_report(const ProjectLayout& layout, const std::map<std::string, std::string>& generated,
                     std::string app = "");

/// generated / (generated + handwritten); 0 when both are zero.
double generation_ratio(const LocReport& r);

struct LineDiff {
    std::size_t added = 0;
    std::size_t removed = 0;
    std::size_t changed() const { return added + removed; }
};

/// Minimal edit between two line sequences (longest common subsequence).
LineDiff diff_lines(const std::vector<std::string>& base, const std::vector<std::string>& variant);

struct ReuseReport {
    std::string base;
    std::string variant;
    std::map<Concern, LineDiff> diffs;

    bool reused(Concern c) const { return diffs.at(c).changed() == 0; }
};

/// Per-concern diff of stripped lines; a concern's files are concatenated in
/// name order.
ReuseReport reuse_report(const ProjectLayout& base, const ProjectLayout& variant);

/// A deployment of `n` devices: device i hosts roster[i % roster.size()] and
/// sits in cell i / roster.size() + 1 of the grown region.
DeploymentSpec synthesize_deployment(const DeploymentSpec& base, const ScalingConfig& s, int n);

struct ScalingRow {
    int devices = 0;
    LocReport loc;
};

struct ScalingSeries {
    std::string app;
    std::vector<ScalingRow> rows;
};

/// Compiles the project once per device count against synthesized
/// deployments. Counts must be strictly increasing.
Outcome<ScalingSeries> scaling_series(const ProjectLayout& layout, const ScalingConfig& s,
                                      const std::vector<int>& counts, std::uint64_t seed);

/// True iff the points lie exactly on y = a + b x.
bool exactly_affine(const std::vector<std::pair<long long, long long>>& points);

inline constexpr const char* kModeNames[] = {"periodic", "event-driven", "request-response", "command"};

struct ExpressivenessRow {
    std::string app;
    std::string behavior;
    std::string domain;
    std::size_t services = 0;
    std::size_t resource_types = 0;
    std::size_t instances = 0;
    std::set<std::string> modes;
    std::string topology = "static";
    std::size_t network_size = 0;
};

ExpressivenessRow expressiveness_row(const ResolvedApp& r, const AppConfig& cfg);

struct PackageSizeRow {
    std::string app;
    std::string device;
    std::size_t tasks = 0;
    std::size_t bytes = 0;
};

std::vector<PackageSizeRow> package_sizes(const std::string& app, const Linkset& ls);

/// Fraction of task bindings that received at least one delivery; 1 for a
/// link set without tasks.
double task_coverage(const Linkset& ls, const SimResult& result);

// Report writers. CSV follows RFC 4180 with LF line endings.
std::string csv_field(std::string_view s);
std::string loc_csv(const std::vector<LocReport>& reports);
std::string reuse_csv(const std::vector<ReuseReport>& reports);
std::string scaling_csv(const ScalingSeries& series);
std::string expressiveness_md(const std::vector<ExpressivenessRow>& rows);
std::string package_sizes_csv(const std::vector<PackageSizeRow>& rows);
/// Line chart of handwritten lines per concern against device count.
std::string scaling_svg(const ScalingSeries& series);

}  // namespace iotforge
