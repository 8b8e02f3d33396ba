#include "firefly/rng.hpp"

#include <limits>

namespace firefly {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Seed derive_seed(Seed base, std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(mix64(mix64(base) ^ a) ^ (b * 0xD6E8FEB86659FD93ULL));
}

Seed derive_seed(Seed run_seed, Stream stream) noexcept {
    return derive_seed(run_seed, 0x5EED0000ULL + static_cast<std::uint64_t>(stream));
}

std::uint64_t RandomStream::uniform_below(std::uint64_t bound) {
    // Rejection sampling keeps the draw exactly uniform.
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return x % bound;
}

double RandomStream::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

} // namespace firefly
