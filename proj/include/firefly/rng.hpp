#pragma once

#include <cstdint>
#include <random>

namespace firefly {

using Seed = std::uint64_t;

// Independent sub-streams of one run seed. Toggling the noise level never
// perturbs the initial clocks or the sampled topology.
enum class Stream : std::uint64_t {
    clock_init = 1,
    topology = 2,
    noise = 3,
    update_order = 4,
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

Seed derive_seed(Seed base, std::uint64_t a, std::uint64_t b = 0) noexcept;
Seed derive_seed(Seed run_seed, Stream stream) noexcept;

// Portable random stream: the draws below are defined in terms of raw
// mt19937_64 output only, so results do not depend on the standard
// library's distribution implementations.
class RandomStream {
public:
    explicit RandomStream(Seed seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform over {0, ..., bound-1}; bound must be positive.
    std::uint64_t uniform_below(std::uint64_t bound);

    // Uniform on [0, 1) with 53 bits of resolution.
    double uniform01();

    bool bernoulli(double p) { return uniform01() < p; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace firefly
