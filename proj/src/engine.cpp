#include "firefly/engine.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <string>

namespace firefly {

int SwarmState::flashing_count() const noexcept {
    return static_cast<int>(std::count(flash_flags.begin(), flash_flags.end(), std::uint8_t{1}));
}

std::vector<int> SwarmState::phases(int cycle_len) const {
    std::vector<int> out;
    out.reserve(clocks.size());
    for (auto c : clocks) {
        out.push_back(static_cast<int>(c % static_cast<std::uint64_t>(cycle_len)));
    }
    return out;
}

TopologySummary TopologySummary::of(const Topology& t) {
    TopologySummary s;
    s.provenance = t.provenance();
    s.range = t.range();
    s.degree = t.degree();
    const auto report = check_topology(t);
    if (!report.degree_histogram.empty()) {
        s.min_degree = report.degree_histogram.begin()->first;
        s.max_degree = report.degree_histogram.rbegin()->first;
    }
    std::size_t total = 0;
    for (const auto& l : t.neighbor_lists()) {
        total += l.size();
    }
    s.mean_degree = t.n_agents() > 0 ? static_cast<double>(total) / t.n_agents() : 0.0;
    s.components = report.components();
    return s;
}

namespace {

void refresh_flag(SwarmState& state, std::size_t i, const ModelParams& params) {
    const auto phase = static_cast<int>(state.clocks[i] % static_cast<std::uint64_t>(params.cycle_len()));
    state.flash_flags[i] = is_flashing(phase, params) ? 1 : 0;
}

void update_agent(SwarmState& state, std::size_t i, const Topology& topology, const ModelParams& params,
                  StepStreams& streams) {
    const auto cycle = static_cast<std::uint64_t>(params.cycle_len());
    state.clocks[i] += 1;
    refresh_flag(state, i, params);
    if (static_cast<int>(state.clocks[i] % cycle) != params.quorum_check_phase()) {
        return;
    }
    const auto neighbors = topology.neighbors(static_cast<int>(i));
    int flashing = 0;
    for (int j : neighbors) {
        flashing += state.flash_flags[static_cast<std::size_t>(j)];
    }
    const bool noise_draw = params.noise_level() > 0.0 && streams.noise.bernoulli(params.noise_level());
    const auto decision = decide(flashing, static_cast<int>(neighbors.size()), params, noise_draw);
    if (decision.applied_advance) {
        state.clocks[i] += 1;
        refresh_flag(state, i, params);
    }
}

} // namespace

SwarmState init_state(const ModelParams& params, Seed rng_seed) {
    RandomStream rng(derive_seed(rng_seed, Stream::clock_init));
    std::vector<std::uint64_t> clocks(static_cast<std::size_t>(params.n_agents()));
    for (auto& c : clocks) {
        c = rng.uniform_below(static_cast<std::uint64_t>(params.cycle_len()));
    }
    return init_state_explicit(params, clocks);
}

SwarmState init_state_explicit(const ModelParams& params, std::span<const std::uint64_t> clocks) {
    if (static_cast<int>(clocks.size()) != params.n_agents()) {
        throw std::invalid_argument("expected " + std::to_string(params.n_agents()) + " clocks, got " +
                                    std::to_string(clocks.size()));
    }
    SwarmState state;
    state.clocks.assign(clocks.begin(), clocks.end());
    state.flash_flags.resize(clocks.size());
    for (std::size_t i = 0; i < clocks.size(); ++i) {
        if (clocks[i] >= static_cast<std::uint64_t>(params.cycle_len())) {
            throw std::invalid_argument("clock " + std::to_string(clocks[i]) + " of agent " + std::to_string(i) +
                                        " outside [0, " + std::to_string(params.cycle_len() - 1) + "]");
        }
        refresh_flag(state, i, params);
    }
    return state;
}

void step(SwarmState& state, const Topology& topology, const ModelParams& params, StepStreams& streams,
          const EngineOptions& options) {
    const std::size_t n = state.clocks.size();
    if (options.order == UpdateOrder::ascending) {
        for (std::size_t i = 0; i < n; ++i) {
            update_agent(state, i, topology, params, streams);
        }
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) {
            std::swap(order[i - 1], order[streams.order.uniform_below(i)]);
        }
        for (auto i : order) {
            update_agent(state, i, topology, params, streams);
        }
    }
    state.step += 1;
}

Trajectory simulate_from(const ModelParams& params, const Topology& topology, SwarmState initial, Seed rng_seed,
                         const EngineOptions& options) {
    if (topology.n_agents() != params.n_agents()) {
        throw std::invalid_argument("topology has " + std::to_string(topology.n_agents()) + " agents, params " +
                                    std::to_string(params.n_agents()));
    }
    if (initial.n_agents() != params.n_agents()) {
        throw std::invalid_argument("initial state does not match n_agents");
    }
    Trajectory traj;
    traj.rng_seed = rng_seed;
    traj.params = params.settings();
    traj.topology_summary = TopologySummary::of(topology);
    const auto horizon = static_cast<std::size_t>(params.horizon());
    traj.amplitude_series.reserve(horizon);
    traj.flashing_counts.reserve(horizon);

    StepStreams streams(rng_seed);
    SwarmState state = std::move(initial);
    const double n = static_cast<double>(params.n_agents());
    for (std::size_t t = 0; t < horizon; ++t) {
        step(state, topology, params, streams, options);
        const int count = state.flashing_count();
        traj.flashing_counts.push_back(count);
        traj.amplitude_series.push_back(static_cast<double>(count) / n);
        if (options.snapshot_interval > 0 && state.step % options.snapshot_interval == 0) {
            traj.snapshots.push_back({state.step, state.clocks});
        }
    }
    traj.final_state = std::move(state);
    return traj;
}

Trajectory simulate(const ModelParams& params, const Topology& topology, Seed rng_seed,
                    const EngineOptions& options) {
    return simulate_from(params, topology, init_state(params, rng_seed), rng_seed, options);
}

void write_amplitude_csv(std::ostream& out, const Trajectory& traj) {
    out << "step,amplitude,flashing_count\n";
    char buf[64];
    for (std::size_t t = 0; t < traj.amplitude_series.size(); ++t) {
        const auto res = std::to_chars(buf, buf + sizeof buf, traj.amplitude_series[t]);
        out << (t + 1) << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << ','
            << traj.flashing_counts[t] << '\n';
    }
}

} // namespace firefly
