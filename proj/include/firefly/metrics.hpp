#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "firefly/engine.hpp"
#include "firefly/model.hpp"
#include "firefly/rng.hpp"

namespace firefly {

inline constexpr double kDefaultSuccessThreshold = 0.85;
inline constexpr int kDefaultClusterGap = 1;

struct RunRecord {
    Seed seed = 0;
    ModelSettings params;
    std::string topology;  // complete | geometric | regular | custom
    double k_or_r = 0.0;
    double a_max = 0.0;
    bool success = false;
    std::optional<int> time_to_sync;  // first 1-based step with amplitude >= threshold
    std::optional<int> cluster_count_final;

    bool operator==(const RunRecord&) const = default;
};

class MetricsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CsvError : public MetricsError {
public:
    CsvError(std::size_t line, const std::string& message)
        : MetricsError("line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

double max_amplitude(std::span<const double> series);
double max_amplitude(const Trajectory& traj);

constexpr bool classify_success(double a_max, double threshold = kDefaultSuccessThreshold) noexcept {
    return a_max >= threshold;
}

std::optional<int> time_to_sync(std::span<const double> series, double threshold = kDefaultSuccessThreshold);

struct ClusterSummary {
    int count = 0;
    std::vector<int> sizes;  // agents per cluster, in cyclic phase order from the first gap
};

/// Groups occupied phase bins into clusters on the cycle. Two occupied bins
/// belong to different clusters when at least gap_threshold consecutive
/// empty bins separate them. gap_threshold must be >= 1.
ClusterSummary phase_clusters(std::span<const int> phases, int cycle_len, int gap_threshold = kDefaultClusterGap);

struct Proportion {
    std::size_t successes = 0;
    std::size_t total = 0;
    double fraction = 0.0;
    // Normal-approximation 95% half-width, 1.96 * sqrt(p(1-p)/n).
    double half_width = 0.0;
};

Proportion success_fraction(std::size_t successes, std::size_t total);
Proportion success_fraction(std::span<const RunRecord> records);

struct RecordOptions {
    double success_threshold = kDefaultSuccessThreshold;
    int cluster_gap = kDefaultClusterGap;
};

std::string topology_label(const Topology& t);
double topology_parameter(const Topology& t);

RunRecord make_record(const Trajectory& traj, const Topology& topology, const RecordOptions& options = {});

inline constexpr std::string_view kRunRecordHeader =
    "seed,n_agents,cycle_len,horizon,theta,f,sigma,topology,k_or_r,a_max,success,time_to_sync,cluster_count_final";

// Shortest round-trip decimal form.
std::string format_number(double value);

std::string to_csv_row(const RunRecord& r);
RunRecord parse_csv_row(std::string_view line, std::size_t line_number = 0);

// Reads a CSV with exactly kRunRecordHeader. Throws CsvError naming the line.
std::vector<RunRecord> read_run_records(std::istream& in);

// Value of a named column, rendered as in the CSV.
std::string column_value(const RunRecord& r, std::string_view column);

struct GroupSummary {
    std::vector<std::string> key;
    Proportion proportion;
    double mean_a_max = 0.0;
};

// Groups appear in ascending order of their keys (numeric where both parse).
std::vector<GroupSummary> aggregate(std::span<const RunRecord> records, std::span<const std::string> group_by);

} // namespace firefly
