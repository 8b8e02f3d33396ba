#include "firefly/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace firefly {

namespace {

using nlohmann::ordered_json;

std::vector<double> decimal_range(int first, int last, int step, double scale) {
    std::vector<double> out;
    for (int v = first; v <= last; v += step) {
        out.push_back(static_cast<double>(v) / scale);
    }
    return out;
}

std::vector<int> int_range(int first, int last, int step) {
    std::vector<int> out;
    for (int v = first; v <= last; v += step) {
        out.push_back(v);
    }
    return out;
}

std::string describe_point(const ModelSettings& s, TopologyKind kind, double connectivity) {
    std::ostringstream os;
    os << "N=" << s.n_agents << " C=" << s.cycle_len << " T=" << s.horizon
       << " theta=" << format_number(s.quorum_threshold) << " f=" << format_number(s.flash_fraction)
       << " topology=" << to_string(kind);
    if (kind != TopologyKind::complete) {
        os << '(' << format_number(connectivity) << ')';
    }
    os << " sigma=" << format_number(s.noise_level);
    return os.str();
}

TopologyRequest resolve_topology(TopologyKind kind, double value, int n) {
    TopologyRequest req{kind, value, 0};
    switch (kind) {
    case TopologyKind::complete:
        req.degree = n - 1;
        break;
    case TopologyKind::geometric:
        if (value < 0.0) {
            throw GraphError("range r must be non-negative");
        }
        break;
    case TopologyKind::regular: {
        const double rounded = std::round(value);
        if (rounded != value) {
            throw GraphError("regular degree must be an integer");
        }
        req.degree = static_cast<int>(rounded);
        break;
    }
    case TopologyKind::removal:
        req.degree = degree_from_removal(n, value);
        break;
    }
    if (kind != TopologyKind::geometric) {
        if (req.degree < 1 || req.degree > n - 1) {
            throw GraphError("degree " + std::to_string(req.degree) + " outside [1, " + std::to_string(n - 1) + "]");
        }
        if ((static_cast<long long>(n) * req.degree) % 2 != 0) {
            throw ParityError("n*k odd (n=" + std::to_string(n) + ", k=" + std::to_string(req.degree) + ")");
        }
    }
    return req;
}

ordered_json axes_to_json(const SweepAxes& a) {
    ordered_json j;
    j["n_agents"] = a.n_agents;
    j["cycle_len"] = a.cycle_len;
    j["horizon"] = a.horizon;
    j["theta"] = a.theta;
    j["f"] = a.flash_fraction;
    auto topo = ordered_json::array();
    for (auto k : a.topology) {
        topo.push_back(to_string(k));
    }
    j["topology"] = topo;
    j["connectivity"] = a.connectivity;
    j["noise"] = a.noise;
    return j;
}

ordered_json spec_to_ordered_json(const SweepSpec& spec) {
    ordered_json j;
    j["name"] = spec.name;
    j["axes"] = axes_to_json(spec.axes);
    j["repetitions"] = spec.repetitions;
    j["base_seed"] = spec.base_seed;
    j["jobs"] = spec.jobs;
    j["output_dir"] = spec.output_dir;
    j["success_threshold"] = spec.success_threshold;
    j["cluster_gap"] = spec.cluster_gap;
    j["max_retries"] = spec.max_retries;
    j["update_order"] = to_string(spec.update_order);
    return j;
}

template <typename T>
void read_optional(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

SweepSpec spec_from_parsed(const nlohmann::json& j) {
    SweepSpec spec;
    read_optional(j, "name", spec.name);
    if (j.contains("axes")) {
        const auto& a = j.at("axes");
        read_optional(a, "n_agents", spec.axes.n_agents);
        read_optional(a, "cycle_len", spec.axes.cycle_len);
        read_optional(a, "horizon", spec.axes.horizon);
        read_optional(a, "theta", spec.axes.theta);
        read_optional(a, "f", spec.axes.flash_fraction);
        if (a.contains("topology")) {
            spec.axes.topology.clear();
            for (const auto& t : a.at("topology")) {
                spec.axes.topology.push_back(parse_topology_kind(t.get<std::string>()));
            }
        }
        read_optional(a, "connectivity", spec.axes.connectivity);
        read_optional(a, "noise", spec.axes.noise);
    }
    read_optional(j, "repetitions", spec.repetitions);
    read_optional(j, "base_seed", spec.base_seed);
    read_optional(j, "jobs", spec.jobs);
    read_optional(j, "output_dir", spec.output_dir);
    read_optional(j, "success_threshold", spec.success_threshold);
    read_optional(j, "cluster_gap", spec.cluster_gap);
    read_optional(j, "max_retries", spec.max_retries);
    if (j.contains("update_order")) {
        spec.update_order = parse_update_order(j.at("update_order").get<std::string>());
    }
    return spec;
}

int worker_count(const SweepSpec& spec, std::size_t runs) {
    int jobs = spec.jobs;
    if (jobs <= 0) {
        jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(runs, 1)));
}

std::string header_line() {
    return std::string(kRunRecordHeader);
}

// Loads complete rows of an interrupted sweep; a torn final line is dropped.
std::vector<RunRecord> load_partial(const std::filesystem::path& csv) {
    std::ifstream in(csv);
    std::vector<RunRecord> records;
    std::string line;
    if (!std::getline(in, line) || line != kRunRecordHeader) {
        return records;
    }
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) {
            continue;
        }
        try {
            records.push_back(parse_csv_row(line, number));
        } catch (const CsvError&) {
            if (in.peek() != std::char_traits<char>::eof()) {
                throw;
            }
        }
    }
    return records;
}

void write_sorted(const std::filesystem::path& csv, std::vector<RunRecord> records) {
    std::stable_sort(records.begin(), records.end(),
                     [](const RunRecord& a, const RunRecord& b) { return a.seed < b.seed; });
    const auto tmp = csv.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw SweepError("cannot write " + tmp);
        }
        out << header_line() << '\n';
        for (const auto& r : records) {
            out << to_csv_row(r) << '\n';
        }
        if (!out) {
            throw SweepError("write failed for " + tmp);
        }
    }
    std::filesystem::rename(tmp, csv);
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

std::string to_string(TopologyKind kind) {
    switch (kind) {
    case TopologyKind::complete:
        return "complete";
    case TopologyKind::geometric:
        return "geometric";
    case TopologyKind::regular:
        return "regular";
    case TopologyKind::removal:
        return "removal";
    }
    return "complete";
}

TopologyKind parse_topology_kind(const std::string& text) {
    if (text == "complete") return TopologyKind::complete;
    if (text == "geometric") return TopologyKind::geometric;
    if (text == "regular") return TopologyKind::regular;
    if (text == "removal") return TopologyKind::removal;
    throw SweepError("unknown topology kind '" + text + "' (expected complete, geometric, regular or removal)");
}

std::string to_string(UpdateOrder order) {
    return order == UpdateOrder::ascending ? "ascending" : "random";
}

UpdateOrder parse_update_order(const std::string& text) {
    if (text == "ascending") return UpdateOrder::ascending;
    if (text == "random") return UpdateOrder::random_permutation;
    throw SweepError("unknown update order '" + text + "' (expected ascending or random)");
}

Seed run_seed(Seed base_seed, std::size_t point_index, int repetition) noexcept {
    return derive_seed(base_seed, static_cast<std::uint64_t>(point_index), static_cast<std::uint64_t>(repetition));
}

ExpandedGrid expand_grid(const SweepSpec& spec) {
    if (spec.repetitions < 1) {
        throw SweepError("repetitions must be at least 1");
    }
    const auto& a = spec.axes;
    ExpandedGrid grid;
    std::size_t point = 0;
    for (int n : a.n_agents) {
        for (int c : a.cycle_len) {
            for (int t : a.horizon) {
                for (double theta : a.theta) {
                    for (double f : a.flash_fraction) {
                        for (TopologyKind kind : a.topology) {
                            // The complete graph has no connectivity knob.
                            const std::vector<double> connectivity =
                                kind == TopologyKind::complete ? std::vector<double>{0.0} : a.connectivity;
                            for (double conn : connectivity) {
                                for (double noise : a.noise) {
                                    ModelSettings s{n, c, t, theta, f, noise};
                                    const std::size_t index = point++;
                                    try {
                                        const ModelParams params(s);
                                        const auto request = resolve_topology(kind, conn, n);
                                        for (int rep = 0; rep < spec.repetitions; ++rep) {
                                            grid.runs.push_back(
                                                {index, rep, run_seed(spec.base_seed, index, rep), s, request});
                                        }
                                    } catch (const std::exception& e) {
                                        grid.skipped.push_back({index, describe_point(s, kind, conn), e.what()});
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    grid.point_count = point;
    return grid;
}

Topology build_topology(const RunConfig& config, int max_retries) {
    const Seed topo_seed = derive_seed(config.seed, Stream::topology);
    const int n = config.params.n_agents;
    switch (config.topology.kind) {
    case TopologyKind::complete:
        return Topology::complete(n);
    case TopologyKind::geometric:
        return generate_geometric(n, config.topology.value, topo_seed);
    case TopologyKind::regular:
    case TopologyKind::removal:
        return generate_k_regular(n, config.topology.degree, topo_seed, max_retries);
    }
    return Topology::complete(n);
}

RunRecord execute_run(const RunConfig& config, const SweepSpec& spec) {
    const ModelParams params(config.params);
    const Topology topology = build_topology(config, spec.max_retries);
    EngineOptions options;
    options.order = spec.update_order;
    const auto traj = simulate(params, topology, config.seed, options);
    return make_record(traj, topology, {spec.success_threshold, spec.cluster_gap});
}

void execute_runs(std::span<const RunConfig> configs, const SweepSpec& spec, const RecordSink& on_record,
                  const FailureSink& on_failure) {
    std::atomic<std::size_t> next{0};
    std::mutex sink_mutex;
    std::exception_ptr sink_error;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) {
                return;
            }
            std::optional<RunRecord> record;
            std::string failure;
            try {
                record = execute_run(configs[i], spec);
            } catch (const std::exception& e) {
                failure = e.what();
            } catch (...) {
                failure = "unknown error";
            }
            std::lock_guard lock(sink_mutex);
            if (sink_error) {
                return;
            }
            try {
                if (record) {
                    on_record(*record);
                } else if (on_failure) {
                    on_failure({configs[i], failure});
                }
            } catch (...) {
                // I/O errors abort the sweep; rows already written stay on disk.
                sink_error = std::current_exception();
                next.store(configs.size());
            }
        }
    };
    const int workers = worker_count(spec, configs.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (sink_error) {
        std::rethrow_exception(sink_error);
    }
}

void sort_csv_by_seed(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) {
        throw SweepError("cannot open " + csv_path.string());
    }
    auto records = read_run_records(in);
    in.close();
    write_sorted(csv_path, std::move(records));
}

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options) {
    const auto grid = expand_grid(spec);
    SweepResult result;
    result.skipped = grid.skipped;

    std::vector<RunConfig> pending = grid.runs;
    std::ofstream csv;
    std::filesystem::path dir(spec.output_dir);
    if (options.write_files) {
        std::filesystem::create_directories(dir);
        result.csv_path = dir / "results.csv";
        result.manifest_path = dir / "manifest.json";
        {
            std::ofstream manifest(result.manifest_path, std::ios::trunc);
            manifest << manifest_json(spec, utc_timestamp()) << '\n';
            if (!manifest) {
                throw SweepError("cannot write " + result.manifest_path.string());
            }
        }
        {
            std::ofstream skipped(dir / "skipped.log", std::ios::trunc);
            for (const auto& s : grid.skipped) {
                skipped << "point " << s.point_index << " [" << s.description << "]: " << s.reason << '\n';
            }
        }
        if (options.resume && std::filesystem::exists(result.csv_path)) {
            auto done = load_partial(result.csv_path);
            std::set<Seed> seen;
            for (const auto& r : done) {
                seen.insert(r.seed);
            }
            std::erase_if(pending, [&](const RunConfig& c) { return seen.count(c.seed) > 0; });
            result.records = std::move(done);
            write_sorted(result.csv_path, result.records);
            csv.open(result.csv_path, std::ios::app);
        } else {
            csv.open(result.csv_path, std::ios::trunc);
            csv << header_line() << '\n';
        }
        if (!csv) {
            throw SweepError("cannot open " + result.csv_path.string());
        }
        csv.flush();
    }

    const std::size_t total = grid.runs.size();
    std::size_t done = total - pending.size();
    execute_runs(
        pending, spec,
        [&](const RunRecord& r) {
            if (csv.is_open()) {
                csv << to_csv_row(r) << '\n';
                csv.flush();
                if (!csv) {
                    throw SweepError("write failed for " + result.csv_path.string());
                }
            }
            result.records.push_back(r);
            ++done;
            if (options.progress) {
                options.progress(done, total);
            }
        },
        [&](const RunFailure& f) {
            result.failures.push_back(f);
            ++done;
            if (options.progress) {
                options.progress(done, total);
            }
        });

    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const RunRecord& a, const RunRecord& b) { return a.seed < b.seed; });
    if (options.write_files) {
        csv.close();
        write_sorted(result.csv_path, result.records);
        std::ofstream failures(dir / "failures.csv", std::ios::trunc);
        failures << "seed,point_index,repetition,message\n";
        for (const auto& f : result.failures) {
            std::string message = f.message;
            std::replace(message.begin(), message.end(), ',', ';');
            failures << f.config.seed << ',' << f.config.point_index << ',' << f.config.repetition << ',' << message
                     << '\n';
        }
    }
    return result;
}

SweepSpec preset_fig1(int repetitions, Seed base_seed) {
    SweepSpec spec;
    spec.name = "fig1";
    spec.axes.n_agents = {100};
    spec.axes.cycle_len = {10};
    spec.axes.horizon = {1000};
    spec.axes.theta = decimal_range(1, 9, 1, 10.0);
    spec.axes.flash_fraction = decimal_range(1, 9, 1, 10.0);
    spec.axes.topology = {TopologyKind::geometric};
    spec.axes.connectivity = decimal_range(5, 100, 5, 100.0);
    spec.axes.noise = {0.0};
    spec.repetitions = repetitions;
    spec.base_seed = base_seed;
    spec.output_dir = "results/fig1";
    return spec;
}

SweepSpec preset_fig3_noise(int repetitions, Seed base_seed) {
    SweepSpec spec;
    spec.name = "fig3-noise";
    spec.axes.n_agents = int_range(50, 190, 20);
    spec.axes.cycle_len = int_range(10, 70, 10);
    spec.axes.horizon = {10000};
    spec.axes.theta = {0.5};
    spec.axes.flash_fraction = {0.5};
    spec.axes.topology = {TopologyKind::complete};
    spec.axes.connectivity = {0.0};
    spec.axes.noise = decimal_range(0, 9, 1, 10.0);
    spec.repetitions = repetitions;
    spec.base_seed = base_seed;
    spec.output_dir = "results/fig3-noise";
    return spec;
}

SweepSpec preset_fig3_removal(int repetitions, Seed base_seed) {
    SweepSpec spec = preset_fig3_noise(repetitions, base_seed);
    spec.name = "fig3-removal";
    spec.axes.topology = {TopologyKind::removal};
    spec.axes.connectivity = decimal_range(0, 9, 1, 10.0);
    spec.axes.noise = {0.0};
    spec.output_dir = "results/fig3-removal";
    return spec;
}

SweepSpec preset_parity(int repetitions, Seed base_seed) {
    SweepSpec spec;
    spec.name = "parity";
    spec.axes.n_agents = {100};
    spec.axes.cycle_len = {10};
    spec.axes.horizon = {10000};
    spec.axes.topology = {TopologyKind::regular};
    spec.axes.connectivity = {19.0, 20.0};
    spec.repetitions = repetitions;
    spec.base_seed = base_seed;
    spec.output_dir = "results/parity";
    return spec;
}

std::vector<std::string> preset_names() {
    return {"fig1", "fig3-noise", "fig3-removal", "parity"};
}

SweepSpec preset_by_name(const std::string& name, int repetitions, Seed base_seed) {
    if (name == "fig1") return preset_fig1(repetitions, base_seed);
    if (name == "fig3-noise") return preset_fig3_noise(repetitions, base_seed);
    if (name == "fig3-removal") return preset_fig3_removal(repetitions, base_seed);
    if (name == "parity") return preset_parity(repetitions, base_seed);
    throw SweepError("unknown preset '" + name + "'");
}

std::string tool_version() {
    return "0.1.0";
}

std::string spec_to_json(const SweepSpec& spec) {
    return spec_to_ordered_json(spec).dump(2);
}

SweepSpec spec_from_json(const std::string& text) {
    try {
        return spec_from_parsed(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw SweepError(std::string("malformed sweep config: ") + e.what());
    }
}

std::string manifest_json(const SweepSpec& spec, const std::string& timestamp) {
    ordered_json m;
    m["spec"] = spec_to_ordered_json(spec);
    m["tool_version"] = tool_version();
    m["timestamp"] = timestamp;
    m["base_seed"] = spec.base_seed;
    return m.dump(2);
}

SweepSpec spec_from_manifest(const std::string& text) {
    try {
        const auto m = nlohmann::json::parse(text);
        return spec_from_parsed(m.at("spec"));
    } catch (const nlohmann::json::exception& e) {
        throw SweepError(std::string("malformed manifest: ") + e.what());
    }
}

} // namespace firefly
