#include "firefly/model.hpp"

#include <algorithm>
#include <cmath>

namespace firefly {

namespace {

// Absorbs binary rounding of decimal inputs, e.g. (1 - 0.7) * 10 = 3.0000000000000004.
constexpr double kDecimalSlack = 1e-9;

} // namespace

int flash_start_phase(int cycle_len, double flash_fraction) {
    const double exact = (1.0 - flash_fraction) * static_cast<double>(cycle_len);
    const double nearest = std::round(exact);
    if (std::abs(exact - nearest) <= kDecimalSlack * std::max(1.0, std::abs(exact))) {
        return static_cast<int>(nearest);
    }
    return static_cast<int>(std::ceil(exact));
}

ModelParams::ModelParams(const ModelSettings& settings) : settings_(settings), flash_start_(0) {
    if (settings.n_agents < 2) {
        throw InvalidParams("n_agents", "need at least 2 agents, got " + std::to_string(settings.n_agents));
    }
    if (settings.cycle_len < 1) {
        throw InvalidParams("cycle_len", "must be positive, got " + std::to_string(settings.cycle_len));
    }
    if (settings.horizon < settings.cycle_len) {
        throw InvalidParams("horizon", "must be at least cycle_len (" + std::to_string(settings.cycle_len) +
                                           "), got " + std::to_string(settings.horizon));
    }
    if (!(settings.quorum_threshold >= 0.0 && settings.quorum_threshold <= 1.0)) {
        throw InvalidParams("quorum_threshold", "must lie in [0, 1]");
    }
    if (!(settings.flash_fraction > 0.0 && settings.flash_fraction <= 1.0)) {
        throw InvalidParams("flash_fraction", "must lie in (0, 1]");
    }
    if (!(settings.noise_level >= 0.0 && settings.noise_level <= 1.0)) {
        throw InvalidParams("noise_level", "must lie in [0, 1]");
    }
    flash_start_ = flash_start_phase(settings.cycle_len, settings.flash_fraction);
    if (flash_start_ + 1 > settings.cycle_len - 1) {
        throw InvalidParams("flash_fraction",
                            "f*C must be at least 2 so the quorum-check phase lies inside the cycle (f=" +
                                std::to_string(settings.flash_fraction) +
                                ", C=" + std::to_string(settings.cycle_len) + ")");
    }
}

int flash_start_phase(const ModelParams& params) {
    return params.flash_start();
}

bool is_flashing(int phase, const ModelParams& params) {
    return phase >= params.flash_start();
}

bool quorum_decision(int flashing_neighbors, int neighbor_count, double quorum_threshold) {
    const double bar = quorum_threshold * static_cast<double>(neighbor_count);
    // A product that is within rounding of an integer is treated as that integer.
    return static_cast<double>(flashing_neighbors) > bar + kDecimalSlack * std::max(1.0, bar);
}

bool quorum_decision(int flashing_neighbors, int neighbor_count, const ModelParams& params) {
    return quorum_decision(flashing_neighbors, neighbor_count, params.quorum_threshold());
}

StepDecision decide(int flashing_neighbors, int neighbor_count, const ModelParams& params, bool noise_draw) {
    StepDecision d;
    d.flashing_neighbors = flashing_neighbors;
    d.quorum_met = quorum_decision(flashing_neighbors, neighbor_count, params);
    d.noise_draw = noise_draw;
    d.applied_advance = noisy_update(d.quorum_met, noise_draw);
    return d;
}

AgentState agent_state(std::uint64_t clock, const ModelParams& params) {
    AgentState s;
    s.clock = clock;
    s.phase = static_cast<int>(clock % static_cast<std::uint64_t>(params.cycle_len()));
    s.flashing = is_flashing(s.phase, params);
    return s;
}

} // namespace firefly
