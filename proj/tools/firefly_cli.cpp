// Command-line front end: single runs, sweeps, CSV analysis and graph checks.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "firefly/engine.hpp"
#include "firefly/graphs.hpp"
#include "firefly/harness.hpp"
#include "firefly/metrics.hpp"
#include "firefly/model.hpp"

using namespace firefly;

namespace {

struct TopologyFlags {
    std::string kind = "complete";
    double range = 0.5;
    int degree = 0;
    double removal = 0.0;
    std::string import_path;
};

void add_topology_flags(CLI::App* cmd, TopologyFlags& t) {
    cmd->add_option("--topology", t.kind, "Interaction graph: complete, geometric, regular or removal")
        ->check(CLI::IsMember({"complete", "geometric", "regular", "removal"}))
        ->capture_default_str();
    cmd->add_option("--r", t.range, "Communication range for geometric graphs")->capture_default_str();
    cmd->add_option("--k", t.degree, "Degree for regular graphs")->capture_default_str();
    cmd->add_option("--removal", t.removal, "Link-removal sigma; degree k = N-1-floor(sigma*N)")
        ->capture_default_str();
    cmd->add_option("--topology-json", t.import_path, "Load the graph from a topology JSON file instead");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Topology make_topology(const TopologyFlags& t, int n, Seed seed) {
    if (!t.import_path.empty()) {
        return topology_from_json(read_file(t.import_path));
    }
    RunConfig config;
    config.seed = seed;
    config.params.n_agents = n;
    config.topology.kind = parse_topology_kind(t.kind);
    switch (config.topology.kind) {
    case TopologyKind::complete:
        config.topology.degree = n - 1;
        break;
    case TopologyKind::geometric:
        config.topology.value = t.range;
        break;
    case TopologyKind::regular:
        if (t.degree < 1) {
            throw InvalidParams("k", "--k is required for regular graphs");
        }
        config.topology.value = t.degree;
        config.topology.degree = t.degree;
        break;
    case TopologyKind::removal:
        config.topology.value = t.removal;
        config.topology.degree = degree_from_removal(n, t.removal);
        break;
    }
    return build_topology(config);
}

std::vector<std::uint64_t> load_clocks(const std::string& path) {
    const auto doc = nlohmann::json::parse(read_file(path));
    const auto& arr = doc.is_object() ? doc.at("clocks") : doc;
    return arr.get<std::vector<std::uint64_t>>();
}

nlohmann::ordered_json record_json(const RunRecord& r) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["n_agents"] = r.params.n_agents;
    j["cycle_len"] = r.params.cycle_len;
    j["horizon"] = r.params.horizon;
    j["theta"] = r.params.quorum_threshold;
    j["f"] = r.params.flash_fraction;
    j["sigma"] = r.params.noise_level;
    j["topology"] = r.topology;
    j["k_or_r"] = r.k_or_r;
    j["a_max"] = r.a_max;
    j["success"] = r.success;
    j["time_to_sync"] = r.time_to_sync ? nlohmann::ordered_json(*r.time_to_sync) : nlohmann::ordered_json();
    j["cluster_count_final"] =
        r.cluster_count_final ? nlohmann::ordered_json(*r.cluster_count_final) : nlohmann::ordered_json();
    return j;
}

void print_groups(std::ostream& os, const std::vector<std::string>& group_by, const std::vector<GroupSummary>& groups) {
    std::vector<std::string> headers = group_by;
    for (const char* h : {"runs", "successes", "success_fraction", "half_width", "mean_a_max"}) {
        headers.emplace_back(h);
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& g : groups) {
        auto row = g.key;
        row.push_back(std::to_string(g.proportion.total));
        row.push_back(std::to_string(g.proportion.successes));
        std::ostringstream a, b, c;
        a << std::fixed << std::setprecision(3) << g.proportion.fraction;
        b << std::fixed << std::setprecision(3) << g.proportion.half_width;
        c << std::fixed << std::setprecision(3) << g.mean_a_max;
        row.push_back(a.str());
        row.push_back(b.str());
        row.push_back(c.str());
        rows.push_back(std::move(row));
    }
    std::vector<std::size_t> width(headers.size());
    for (std::size_t i = 0; i < headers.size(); ++i) {
        width[i] = headers[i].size();
        for (const auto& r : rows) {
            width[i] = std::max(width[i], r[i].size());
        }
    }
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            os << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << cells[i];
        }
        os << '\n';
    };
    emit(headers);
    for (const auto& r : rows) {
        emit(r);
    }
}

void write_tidy(const std::string& path, const std::vector<std::string>& group_by,
                const std::vector<GroupSummary>& groups) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    for (const auto& g : group_by) {
        out << g << ',';
    }
    out << "runs,successes,success_fraction,half_width,mean_a_max\n";
    for (const auto& g : groups) {
        for (const auto& k : g.key) {
            out << k << ',';
        }
        out << g.proportion.total << ',' << g.proportion.successes << ',' << format_number(g.proportion.fraction)
            << ',' << format_number(g.proportion.half_width) << ',' << format_number(g.mean_a_max) << '\n';
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

std::string flag_for(const std::string& field) {
    static const std::map<std::string, std::string> flags = {
        {"n_agents", "n"},   {"cycle_len", "c"}, {"horizon", "t"},          {"quorum_threshold", "theta"},
        {"flash_fraction", "f"}, {"noise_level", "sigma"}, {"k", "k"},
    };
    const auto it = flags.find(field);
    return it == flags.end() ? field : it->second;
}

const std::vector<std::string> kPointColumns = {"n_agents", "cycle_len", "horizon", "theta",
                                                "f",        "sigma",     "topology", "k_or_r"};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quorum-threshold pulse-coupled oscillator simulator"};
    app.require_subcommand(1);
    int verbosity = 1;
    app.add_flag("-v,--verbose", verbosity, "Increase verbosity");

    // run
    auto* run = app.add_subcommand("run", "Simulate one run and print its RunRecord");
    ModelSettings settings;
    Seed seed = 1;
    TopologyFlags run_topology;
    std::string init_clocks;
    std::string amplitude_csv;
    std::string format = "csv";
    std::string order = "ascending";
    double threshold = kDefaultSuccessThreshold;
    int cluster_gap = kDefaultClusterGap;
    run->add_option("--n", settings.n_agents, "Number of agents N")->capture_default_str();
    run->add_option("--c", settings.cycle_len, "Cycle length C")->capture_default_str();
    run->add_option("--t", settings.horizon, "Horizon T in steps")->capture_default_str();
    run->add_option("--theta", settings.quorum_threshold, "Quorum threshold")->capture_default_str();
    run->add_option("--f", settings.flash_fraction, "Flash fraction of the cycle")->capture_default_str();
    run->add_option("--sigma", settings.noise_level, "Clock-update noise level")->capture_default_str();
    add_topology_flags(run, run_topology);
    run->add_option("--seed", seed, "Run seed")->capture_default_str();
    run->add_option("--init-clocks", init_clocks, "JSON file with explicit initial clocks");
    run->add_option("--amplitude-csv", amplitude_csv, "Write step,amplitude,flashing_count to this file");
    run->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    run->add_option("--order", order, "Update order within a step")
        ->check(CLI::IsMember({"ascending", "random"}))
        ->capture_default_str();
    run->add_option("--threshold", threshold, "Success threshold on A_max")->capture_default_str();
    run->add_option("--cluster-gap", cluster_gap, "Empty bins separating phase clusters")->capture_default_str();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a preset or custom parameter sweep");
    std::string preset;
    std::string grid_path;
    std::string manifest_path;
    int reps = 0;
    std::optional<Seed> sweep_seed;
    int jobs = 0;
    std::string out_dir;
    bool resume = false;
    bool quiet = false;
    auto* source = sweep->add_option_group("source");
    source->add_option("--preset", preset, "Preset: fig1, fig3-noise, fig3-removal, parity");
    source->add_option("--grid", grid_path, "JSON sweep config");
    source->add_option("--manifest", manifest_path, "Replay the sweep recorded in a manifest");
    source->require_option(1);
    sweep->add_option("--reps", reps, "Repetitions per grid point (preset default when 0)")->capture_default_str();
    sweep->add_option("--seed", sweep_seed, "Base seed (required for --preset and --grid)");
    sweep->add_option("--jobs", jobs, "Worker threads (0 = hardware concurrency)")->capture_default_str();
    sweep->add_option("--out", out_dir, "Output directory (default: $FIREFLY_OUT_DIR/<preset> or the spec's)");
    sweep->add_flag("--resume", resume, "Keep rows from an interrupted sweep in the output directory");
    sweep->add_flag("--quiet", quiet, "No progress output");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Aggregate success fractions from a results CSV");
    std::string csv_path;
    std::string group_by = "n_agents,cycle_len";
    std::string tidy_path;
    analyze->add_option("csv", csv_path, "Results CSV")->required();
    analyze->add_option("--group-by", group_by, "Comma-separated grouping columns")->capture_default_str();
    analyze->add_option("--out", tidy_path, "Write the aggregate as a tidy CSV");

    // validate-graph
    auto* validate = app.add_subcommand("validate-graph", "Generate or load a topology and check it");
    TopologyFlags graph_topology;
    int graph_n = 100;
    Seed graph_seed = 1;
    std::string export_path;
    std::string graph_format = "text";
    validate->add_option("--n", graph_n, "Number of agents")->capture_default_str();
    add_topology_flags(validate, graph_topology);
    validate->add_option("--seed", graph_seed, "Graph seed")->capture_default_str();
    validate->add_option("--export", export_path, "Write the topology as JSON");
    validate->add_option("--format", graph_format, "Report format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const ModelParams params(settings);
            const Topology topology = make_topology(run_topology, settings.n_agents, seed);
            EngineOptions options;
            options.order = parse_update_order(order);
            const Trajectory traj =
                init_clocks.empty()
                    ? simulate(params, topology, seed, options)
                    : simulate_from(params, topology, init_state_explicit(params, load_clocks(init_clocks)), seed,
                                    options);
            const RunRecord record = make_record(traj, topology, {threshold, cluster_gap});
            if (!amplitude_csv.empty()) {
                std::ofstream out(amplitude_csv, std::ios::trunc);
                write_amplitude_csv(out, traj);
            }
            if (format == "json") {
                std::cout << record_json(record).dump() << '\n';
            } else {
                std::cout << kRunRecordHeader << '\n' << to_csv_row(record) << '\n';
            }
            return 0;
        }

        if (*sweep) {
            SweepSpec spec;
            if (!manifest_path.empty()) {
                spec = spec_from_manifest(read_file(manifest_path));
            } else {
                if (!sweep_seed) {
                    std::cerr << "error: --seed is required for --preset and --grid sweeps\n";
                    return 2;
                }
                spec = preset.empty() ? spec_from_json(read_file(grid_path))
                                      : preset_by_name(preset, reps > 0 ? reps : (preset == "fig1" ? 50 : 100),
                                                       *sweep_seed);
            }
            if (sweep_seed) {
                spec.base_seed = *sweep_seed;
            }
            if (reps > 0) {
                spec.repetitions = reps;
            }
            if (jobs > 0) {
                spec.jobs = jobs;
            }
            if (!out_dir.empty()) {
                spec.output_dir = out_dir;
            } else if (const char* env = std::getenv("FIREFLY_OUT_DIR"); env && *env && manifest_path.empty()) {
                spec.output_dir = (std::filesystem::path(env) / spec.name).string();
            }
            SweepOptions options;
            options.resume = resume;
            if (!quiet) {
                options.progress = [](std::size_t done, std::size_t total) {
                    if (done == total || done % 100 == 0) {
                        std::cerr << "\r" << done << "/" << total << " runs" << std::flush;
                    }
                };
            }
            const auto result = run_sweep(spec, options);
            if (!quiet) {
                std::cerr << '\n';
            }
            for (const auto& s : result.skipped) {
                std::cerr << "skipped point " << s.point_index << " [" << s.description << "]: " << s.reason << '\n';
            }
            for (const auto& f : result.failures) {
                std::cerr << "run " << f.config.seed << " failed: " << f.message << '\n';
            }
            if (!result.records.empty()) {
                print_groups(std::cout, kPointColumns, aggregate(result.records, kPointColumns));
            }
            std::cout << "results: " << result.csv_path.string() << "\nmanifest: " << result.manifest_path.string()
                      << '\n';
            return result.ok() ? 0 : 1;
        }

        if (*analyze) {
            std::ifstream in(csv_path);
            if (!in) {
                std::cerr << "error: cannot open " << csv_path << '\n';
                return 1;
            }
            const auto records = read_run_records(in);
            if (records.empty()) {
                std::cerr << "error: " << csv_path << " contains no runs\n";
                return 1;
            }
            const auto columns = split_list(group_by);
            const auto groups = aggregate(records, columns);
            print_groups(std::cout, columns, groups);
            if (!tidy_path.empty()) {
                write_tidy(tidy_path, columns, groups);
            }
            return 0;
        }

        if (*validate) {
            const Topology topology = make_topology(graph_topology, graph_n, derive_seed(graph_seed, Stream::topology));
            const auto report = check_topology(topology);
            if (!export_path.empty()) {
                std::ofstream out(export_path, std::ios::trunc);
                out << topology_to_json(topology) << '\n';
            }
            if (graph_format == "json") {
                nlohmann::ordered_json j;
                j["n"] = topology.n_agents();
                j["provenance"] = to_string(topology.provenance());
                j["symmetric"] = report.symmetric;
                j["self_loops"] = report.self_loops;
                j["duplicates"] = report.duplicates;
                nlohmann::ordered_json degrees;
                for (const auto& [d, count] : report.degree_histogram) {
                    degrees[std::to_string(d)] = count;
                }
                j["degrees"] = degrees;
                j["components"] = report.components();
                j["component_sizes"] = report.component_sizes;
                std::cout << j.dump() << '\n';
            } else {
                std::cout << "agents: " << topology.n_agents() << " (" << to_string(topology.provenance()) << ")\n"
                          << "edges: " << topology.edge_count() << '\n'
                          << "symmetric: " << (report.symmetric ? "yes" : "no") << '\n'
                          << "self-loops: " << report.self_loops << "\nduplicates: " << report.duplicates << '\n'
                          << "degrees:";
                for (const auto& [d, count] : report.degree_histogram) {
                    std::cout << ' ' << d << 'x' << count;
                }
                std::cout << "\ncomponents: " << report.components() << '\n';
            }
            return report.simple() ? 0 : 1;
        }
    } catch (const InvalidParams& e) {
        std::cerr << "error: invalid --" << flag_for(e.field()) << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
