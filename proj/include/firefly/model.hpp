#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace firefly {

class InvalidParams : public std::invalid_argument {
public:
    InvalidParams(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    // Name of the offending knob (n_agents, cycle_len, ...).
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Raw, unvalidated knobs of a run. Defaults are the headline configuration
// (N=100, C=10, T=1000, theta=f=0.5, no noise).
struct ModelSettings {
    int n_agents = 100;
    int cycle_len = 10;
    int horizon = 1000;
    double quorum_threshold = 0.5;
    double flash_fraction = 0.5;
    double noise_level = 0.0;

    bool operator==(const ModelSettings&) const = default;
};

/// Validated model parameters. Construction rejects any combination for
/// which the quorum-check phase (flash start + 1) falls outside the cycle,
/// i.e. f*C < 2.
class ModelParams {
public:
    explicit ModelParams(const ModelSettings& settings);

    int n_agents() const noexcept { return settings_.n_agents; }
    int cycle_len() const noexcept { return settings_.cycle_len; }
    int horizon() const noexcept { return settings_.horizon; }
    double quorum_threshold() const noexcept { return settings_.quorum_threshold; }
    double flash_fraction() const noexcept { return settings_.flash_fraction; }
    double noise_level() const noexcept { return settings_.noise_level; }

    // First phase of the flashing window {flash_start, ..., C-1}.
    int flash_start() const noexcept { return flash_start_; }
    // Phase at which the quorum rule is evaluated.
    int quorum_check_phase() const noexcept { return flash_start_ + 1; }

    const ModelSettings& settings() const noexcept { return settings_; }

private:
    ModelSettings settings_;
    int flash_start_;
};

struct AgentState {
    std::uint64_t clock = 0;
    int phase = 0;
    bool flashing = false;
};

struct StepDecision {
    int flashing_neighbors = 0;
    bool quorum_met = false;
    bool noise_draw = false;
    bool applied_advance = false;
};

// ceil((1 - f) * C), robust to the representation error of decimal f.
int flash_start_phase(int cycle_len, double flash_fraction);
int flash_start_phase(const ModelParams& params);

bool is_flashing(int phase, const ModelParams& params);

// m > theta * |N(i)|, strict. An isolated agent never meets quorum.
bool quorum_decision(int flashing_neighbors, int neighbor_count, double quorum_threshold);
bool quorum_decision(int flashing_neighbors, int neighbor_count, const ModelParams& params);

// The deterministic decision, inverted when the noise draw fires.
constexpr bool noisy_update(bool quorum_met, bool noise_draw) noexcept {
    return quorum_met != noise_draw;
}

StepDecision decide(int flashing_neighbors, int neighbor_count, const ModelParams& params, bool noise_draw);

AgentState agent_state(std::uint64_t clock, const ModelParams& params);

} // namespace firefly
