#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "firefly/graphs.hpp"
#include "firefly/model.hpp"
#include "firefly/rng.hpp"

namespace firefly {

struct SwarmState {
    // Unbounded counters; phase = clock mod C.
    std::vector<std::uint64_t> clocks;
    // flash_flags[i] == (phase of agent i >= flash start) after its latest update.
    std::vector<std::uint8_t> flash_flags;
    int step = 0;

    int n_agents() const noexcept { return static_cast<int>(clocks.size()); }
    int flashing_count() const noexcept;
    std::vector<int> phases(int cycle_len) const;
};

enum class UpdateOrder {
    ascending,          // agents 0..N-1 in index order each step
    random_permutation, // fresh seeded shuffle each step
};

struct EngineOptions {
    UpdateOrder order = UpdateOrder::ascending;
    // Store a full clock snapshot every this many steps (0 = never).
    int snapshot_interval = 0;
};

// Random sources consumed inside a step.
struct StepStreams {
    RandomStream noise;
    RandomStream order;

    explicit StepStreams(Seed run_seed)
        : noise(derive_seed(run_seed, Stream::noise)), order(derive_seed(run_seed, Stream::update_order)) {}
};

struct Snapshot {
    int step = 0;
    std::vector<std::uint64_t> clocks;
};

struct TopologySummary {
    Provenance provenance = Provenance::custom;
    double range = 0.0;
    int degree = 0;
    int min_degree = 0;
    int max_degree = 0;
    double mean_degree = 0.0;
    int components = 0;

    static TopologySummary of(const Topology& t);
};

struct Trajectory {
    // Fraction of agents flashing after each full sweep; size == horizon.
    std::vector<double> amplitude_series;
    std::vector<int> flashing_counts;
    std::vector<Snapshot> snapshots;
    SwarmState final_state;
    Seed rng_seed = 0;
    ModelSettings params;
    TopologySummary topology_summary;
};

SwarmState init_state(const ModelParams& params, Seed rng_seed);

// Throws std::invalid_argument when a clock lies outside [0, C-1] or the
// agent count does not match.
SwarmState init_state_explicit(const ModelParams& params, std::span<const std::uint64_t> clocks);

/// Advances every agent once, sequentially. Each agent ticks, recomputes its
/// flash flag and, on reaching the quorum-check phase, counts flashing
/// neighbors using the live flags (agents already updated this step show
/// their new state). An applied advance adds one extra tick. The noise draw
/// happens only at the check phase and only when the noise level is nonzero.
void step(SwarmState& state, const Topology& topology, const ModelParams& params, StepStreams& streams,
          const EngineOptions& options = {});

Trajectory simulate(const ModelParams& params, const Topology& topology, Seed rng_seed,
                    const EngineOptions& options = {});

// Same as simulate() but starting from a caller-supplied state.
Trajectory simulate_from(const ModelParams& params, const Topology& topology, SwarmState initial, Seed rng_seed,
                         const EngineOptions& options = {});

// "step,amplitude,flashing_count" followed by one row per step (1-based).
void write_amplitude_csv(std::ostream& out, const Trajectory& traj);

} // namespace firefly
