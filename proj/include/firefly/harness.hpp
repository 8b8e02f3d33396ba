#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "firefly/engine.hpp"
#include "firefly/graphs.hpp"
#include "firefly/metrics.hpp"
#include "firefly/model.hpp"

namespace firefly {

class SweepError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TopologyKind {
    complete,   // k = N - 1, connectivity axis ignored
    geometric,  // connectivity axis is the range r
    regular,    // connectivity axis is the degree k
    removal,    // connectivity axis is the link-removal sigma; k = N - 1 - floor(sigma * N)
};

std::string to_string(TopologyKind kind);
TopologyKind parse_topology_kind(const std::string& text);

std::string to_string(UpdateOrder order);
UpdateOrder parse_update_order(const std::string& text);

struct SweepAxes {
    std::vector<int> n_agents{100};
    std::vector<int> cycle_len{10};
    std::vector<int> horizon{1000};
    std::vector<double> theta{0.5};
    std::vector<double> flash_fraction{0.5};
    std::vector<TopologyKind> topology{TopologyKind::complete};
    std::vector<double> connectivity{0.0};
    std::vector<double> noise{0.0};

    bool operator==(const SweepAxes&) const = default;
};

struct SweepSpec {
    std::string name = "custom";
    SweepAxes axes;
    int repetitions = 1;
    Seed base_seed = 0;
    int jobs = 0;  // 0: one worker per hardware thread
    std::string output_dir = "results";
    double success_threshold = kDefaultSuccessThreshold;
    int cluster_gap = kDefaultClusterGap;
    int max_retries = kDefaultMaxRetries;
    UpdateOrder update_order = UpdateOrder::ascending;

    bool operator==(const SweepSpec&) const = default;
};

struct TopologyRequest {
    TopologyKind kind = TopologyKind::complete;
    double value = 0.0;  // r, k or removal sigma as given on the axis
    int degree = 0;      // resolved degree for complete/regular/removal

    bool operator==(const TopologyRequest&) const = default;
};

struct RunConfig {
    std::size_t point_index = 0;
    int repetition = 0;
    Seed seed = 0;
    ModelSettings params;
    TopologyRequest topology;
};

struct SkippedPoint {
    std::size_t point_index = 0;
    std::string description;
    std::string reason;
};

struct ExpandedGrid {
    std::vector<RunConfig> runs;
    std::vector<SkippedPoint> skipped;
    std::size_t point_count = 0;
};

// Run seed for a grid point and repetition.
Seed run_seed(Seed base_seed, std::size_t point_index, int repetition) noexcept;

/// Cartesian product of the axes (nesting order: N, C, T, theta, f,
/// topology, connectivity, noise) times repetitions. Points that fail
/// validation are reported in `skipped` and produce no runs; the point index
/// still advances so seeds do not depend on which points are valid.
ExpandedGrid expand_grid(const SweepSpec& spec);

// Samples the run's topology from its own sub-stream of the run seed.
Topology build_topology(const RunConfig& config, int max_retries = kDefaultMaxRetries);

RunRecord execute_run(const RunConfig& config, const SweepSpec& spec);

struct RunFailure {
    RunConfig config;
    std::string message;
};

using RecordSink = std::function<void(const RunRecord&)>;
using FailureSink = std::function<void(const RunFailure&)>;

// Worker pool over independent runs. Sinks are invoked one at a time.
void execute_runs(std::span<const RunConfig> configs, const SweepSpec& spec, const RecordSink& on_record,
                  const FailureSink& on_failure = {});

struct SweepOptions {
    bool write_files = true;
    // Keep rows of an interrupted sweep found in the output directory.
    bool resume = false;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

struct SweepResult {
    std::vector<RunRecord> records;  // sorted by seed
    std::vector<RunFailure> failures;
    std::vector<SkippedPoint> skipped;
    std::filesystem::path csv_path;
    std::filesystem::path manifest_path;
    bool ok() const noexcept { return failures.empty() && skipped.empty(); }
};

/// Runs every valid config of the spec. With write_files, rows are appended
/// to <output_dir>/results.csv as runs finish, the file is rewritten sorted
/// by seed at the end, and manifest.json, skipped.log and failures.csv are
/// written beside it.
SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options = {});

// Rewrites a results CSV with its rows sorted by seed.
void sort_csv_by_seed(const std::filesystem::path& csv_path);

SweepSpec preset_fig1(int repetitions = 50, Seed base_seed = 1);
SweepSpec preset_fig3_noise(int repetitions = 100, Seed base_seed = 1);
SweepSpec preset_fig3_removal(int repetitions = 100, Seed base_seed = 1);
SweepSpec preset_parity(int repetitions = 100, Seed base_seed = 1);
SweepSpec preset_by_name(const std::string& name, int repetitions, Seed base_seed);
std::vector<std::string> preset_names();

std::string tool_version();

std::string spec_to_json(const SweepSpec& spec);
SweepSpec spec_from_json(const std::string& text);

// {spec, tool_version, timestamp, base_seed}
std::string manifest_json(const SweepSpec& spec, const std::string& timestamp);
SweepSpec spec_from_manifest(const std::string& text);

} // namespace firefly
