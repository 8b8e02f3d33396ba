#include "firefly/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace firefly {

namespace {

constexpr std::string_view kColumns[] = {"seed", "n_agents", "cycle_len", "horizon", "theta",
                                          "f", "sigma", "topology", "k_or_r", "a_max",
                                          "success", "time_to_sync", "cluster_count_final"};
constexpr std::size_t kColumnCount = std::size(kColumns);

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

template <typename T>
T parse_field(std::string_view text, std::string_view column, std::size_t line) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw CsvError(line, "cannot parse column '" + std::string(column) + "' from '" + std::string(text) + "'");
    }
    return value;
}

std::optional<int> parse_optional(std::string_view text, std::string_view column, std::size_t line) {
    if (text.empty()) {
        return std::nullopt;
    }
    return parse_field<int>(text, column, line);
}

std::string format_optional(const std::optional<int>& v) {
    return v ? std::to_string(*v) : std::string{};
}

bool numeric_less(const std::string& a, const std::string& b) {
    double x = 0.0;
    double y = 0.0;
    const auto rx = std::from_chars(a.data(), a.data() + a.size(), x);
    const auto ry = std::from_chars(b.data(), b.data() + b.size(), y);
    const bool nx = rx.ec == std::errc{} && rx.ptr == a.data() + a.size();
    const bool ny = ry.ec == std::errc{} && ry.ptr == b.data() + b.size();
    if (nx && ny && x != y) {
        return x < y;
    }
    return a < b;
}

} // namespace

double max_amplitude(std::span<const double> series) {
    if (series.empty()) {
        throw MetricsError("max_amplitude of an empty series");
    }
    return *std::max_element(series.begin(), series.end());
}

double max_amplitude(const Trajectory& traj) {
    return max_amplitude(traj.amplitude_series);
}

std::optional<int> time_to_sync(std::span<const double> series, double threshold) {
    for (std::size_t t = 0; t < series.size(); ++t) {
        if (classify_success(series[t], threshold)) {
            return static_cast<int>(t + 1);
        }
    }
    return std::nullopt;
}

ClusterSummary phase_clusters(std::span<const int> phases, int cycle_len, int gap_threshold) {
    if (cycle_len < 1) {
        throw MetricsError("cycle_len must be positive");
    }
    if (gap_threshold < 1) {
        throw MetricsError("gap_threshold must be at least 1");
    }
    std::vector<int> occupancy(static_cast<std::size_t>(cycle_len), 0);
    for (int p : phases) {
        if (p < 0 || p >= cycle_len) {
            throw MetricsError("phase " + std::to_string(p) + " outside the cycle");
        }
        occupancy[static_cast<std::size_t>(p)] += 1;
    }
    ClusterSummary summary;
    if (phases.empty()) {
        return summary;
    }
    // Start scanning right after the end of a qualifying gap, if any.
    int start = -1;
    for (int b = 0; b < cycle_len && start < 0; ++b) {
        if (occupancy[static_cast<std::size_t>(b)] == 0) {
            continue;
        }
        int empty = 0;
        for (int back = 1; back <= cycle_len; ++back) {
            if (occupancy[static_cast<std::size_t>((b - back + cycle_len) % cycle_len)] != 0) {
                break;
            }
            ++empty;
        }
        if (empty >= gap_threshold) {
            start = b;
        }
    }
    if (start < 0) {
        summary.count = 1;
        summary.sizes.push_back(static_cast<int>(phases.size()));
        return summary;
    }
    int current = 0;
    int empty_run = 0;
    for (int offset = 0; offset < cycle_len; ++offset) {
        const int occupied = occupancy[static_cast<std::size_t>((start + offset) % cycle_len)];
        if (occupied == 0) {
            ++empty_run;
            continue;
        }
        if (empty_run >= gap_threshold && current > 0) {
            summary.sizes.push_back(current);
            current = 0;
        }
        empty_run = 0;
        current += occupied;
    }
    if (current > 0) {
        summary.sizes.push_back(current);
    }
    summary.count = static_cast<int>(summary.sizes.size());
    return summary;
}

Proportion success_fraction(std::size_t successes, std::size_t total) {
    if (total == 0) {
        throw MetricsError("success_fraction of an empty record set");
    }
    Proportion p;
    p.successes = successes;
    p.total = total;
    p.fraction = static_cast<double>(successes) / static_cast<double>(total);
    p.half_width = 1.96 * std::sqrt(p.fraction * (1.0 - p.fraction) / static_cast<double>(total));
    return p;
}

Proportion success_fraction(std::span<const RunRecord> records) {
    const auto wins = static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const RunRecord& r) { return r.success; }));
    return success_fraction(wins, records.size());
}

std::string topology_label(const Topology& t) {
    switch (t.provenance()) {
    case Provenance::geometric:
        return "geometric";
    case Provenance::regular:
        return t.degree() == t.n_agents() - 1 ? "complete" : "regular";
    case Provenance::custom:
        return "custom";
    }
    return "custom";
}

double topology_parameter(const Topology& t) {
    switch (t.provenance()) {
    case Provenance::geometric:
        return t.range();
    case Provenance::regular:
        return t.degree();
    case Provenance::custom:
        return 0.0;
    }
    return 0.0;
}

RunRecord make_record(const Trajectory& traj, const Topology& topology, const RecordOptions& options) {
    RunRecord r;
    r.seed = traj.rng_seed;
    r.params = traj.params;
    r.topology = topology_label(topology);
    r.k_or_r = topology_parameter(topology);
    r.a_max = max_amplitude(traj);
    r.success = classify_success(r.a_max, options.success_threshold);
    r.time_to_sync = time_to_sync(traj.amplitude_series, options.success_threshold);
    r.cluster_count_final =
        phase_clusters(traj.final_state.phases(traj.params.cycle_len), traj.params.cycle_len, options.cluster_gap)
            .count;
    return r;
}

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string column_value(const RunRecord& r, std::string_view column) {
    if (column == "seed") return std::to_string(r.seed);
    if (column == "n_agents") return std::to_string(r.params.n_agents);
    if (column == "cycle_len") return std::to_string(r.params.cycle_len);
    if (column == "horizon") return std::to_string(r.params.horizon);
    if (column == "theta") return format_number(r.params.quorum_threshold);
    if (column == "f") return format_number(r.params.flash_fraction);
    if (column == "sigma") return format_number(r.params.noise_level);
    if (column == "topology") return r.topology;
    if (column == "k_or_r") return format_number(r.k_or_r);
    if (column == "a_max") return format_number(r.a_max);
    if (column == "success") return r.success ? "1" : "0";
    if (column == "time_to_sync") return format_optional(r.time_to_sync);
    if (column == "cluster_count_final") return format_optional(r.cluster_count_final);
    throw MetricsError("unknown column '" + std::string(column) + "'");
}

std::string to_csv_row(const RunRecord& r) {
    std::string row;
    for (std::size_t i = 0; i < kColumnCount; ++i) {
        if (i > 0) {
            row += ',';
        }
        row += column_value(r, kColumns[i]);
    }
    return row;
}

RunRecord parse_csv_row(std::string_view line, std::size_t line_number) {
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    const auto fields = split(line, ',');
    if (fields.size() != kColumnCount) {
        throw CsvError(line_number, "expected " + std::to_string(kColumnCount) + " fields, found " +
                                        std::to_string(fields.size()));
    }
    RunRecord r;
    r.seed = parse_field<Seed>(fields[0], kColumns[0], line_number);
    r.params.n_agents = parse_field<int>(fields[1], kColumns[1], line_number);
    r.params.cycle_len = parse_field<int>(fields[2], kColumns[2], line_number);
    r.params.horizon = parse_field<int>(fields[3], kColumns[3], line_number);
    r.params.quorum_threshold = parse_field<double>(fields[4], kColumns[4], line_number);
    r.params.flash_fraction = parse_field<double>(fields[5], kColumns[5], line_number);
    r.params.noise_level = parse_field<double>(fields[6], kColumns[6], line_number);
    r.topology = std::string(fields[7]);
    r.k_or_r = parse_field<double>(fields[8], kColumns[8], line_number);
    r.a_max = parse_field<double>(fields[9], kColumns[9], line_number);
    const int success = parse_field<int>(fields[10], kColumns[10], line_number);
    if (success != 0 && success != 1) {
        throw CsvError(line_number, "success must be 0 or 1");
    }
    r.success = success == 1;
    r.time_to_sync = parse_optional(fields[11], kColumns[11], line_number);
    r.cluster_count_final = parse_optional(fields[12], kColumns[12], line_number);
    return r;
}

std::vector<RunRecord> read_run_records(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw CsvError(1, "empty input: missing header");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kRunRecordHeader) {
        throw CsvError(1, "unexpected header '" + line + "'");
    }
    std::vector<RunRecord> records;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) {
            continue;
        }
        records.push_back(parse_csv_row(line, number));
    }
    return records;
}

std::vector<GroupSummary> aggregate(std::span<const RunRecord> records, std::span<const std::string> group_by) {
    struct KeyLess {
        bool operator()(const std::vector<std::string>& a, const std::vector<std::string>& b) const {
            for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
                if (a[i] != b[i]) {
                    return numeric_less(a[i], b[i]);
                }
            }
            return a.size() < b.size();
        }
    };
    struct Acc {
        std::size_t wins = 0;
        std::size_t total = 0;
        double a_max_sum = 0.0;
    };
    std::map<std::vector<std::string>, Acc, KeyLess> groups;
    for (const auto& r : records) {
        std::vector<std::string> key;
        key.reserve(group_by.size());
        for (const auto& column : group_by) {
            key.push_back(column_value(r, column));
        }
        auto& acc = groups[key];
        acc.wins += r.success ? 1 : 0;
        acc.total += 1;
        acc.a_max_sum += r.a_max;
    }
    std::vector<GroupSummary> out;
    out.reserve(groups.size());
    for (const auto& [key, acc] : groups) {
        out.push_back({key, success_fraction(acc.wins, acc.total), acc.a_max_sum / static_cast<double>(acc.total)});
    }
    return out;
}

} // namespace firefly
