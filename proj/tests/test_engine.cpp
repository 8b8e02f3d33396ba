#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "firefly/engine.hpp"
#include "firefly/metrics.hpp"
#include "reference_simulator.hpp"

using namespace firefly;

namespace {

ModelParams make_params(int n, int horizon = 1000, double sigma = 0.0, int cycle = 10) {
    ModelSettings s;
    s.n_agents = n;
    s.cycle_len = cycle;
    s.horizon = horizon;
    s.noise_level = sigma;
    return ModelParams(s);
}

std::vector<std::uint64_t> two_blocks(int n) {
    std::vector<std::uint64_t> clocks(static_cast<std::size_t>(n), 0);
    std::fill(clocks.begin() + n / 2, clocks.end(), 5);
    return clocks;
}

} // namespace

TEST_CASE("init_state_explicit") {
    const auto p = make_params(2);
    const std::vector<std::uint64_t> clocks{0, 5};
    const auto s = init_state_explicit(p, clocks);
    CHECK(s.flash_flags == std::vector<std::uint8_t>{0, 1});
    CHECK(s.step == 0);

    const auto p100 = make_params(100);
    const std::vector<std::uint64_t> all_five(100, 5);
    CHECK(init_state_explicit(p100, all_five).flashing_count() == 100);
    const std::vector<std::uint64_t> all_seven(100, 7);
    CHECK(init_state_explicit(p100, all_seven).flashing_count() == 100);
    const std::vector<std::uint64_t> all_zero(100, 0);
    CHECK(init_state_explicit(p100, all_zero).flashing_count() == 0);
    CHECK(init_state_explicit(p100, two_blocks(100)).flashing_count() == 50);

    const std::vector<std::uint64_t> out_of_range{0, 10};
    CHECK_THROWS_AS(init_state_explicit(p, out_of_range), std::invalid_argument);
    const std::vector<std::uint64_t> too_few{0};
    CHECK_THROWS_AS(init_state_explicit(p, too_few), std::invalid_argument);
}

TEST_CASE("init_state draws uniform phases") {
    const int n = 100000;
    const auto p = make_params(n, 10);
    const auto s = init_state(p, 31337);
    std::vector<int> bins(10, 0);
    for (auto c : s.clocks) {
        REQUIRE(c < 10);
        bins[c] += 1;
    }
    const double expected = n / 10.0;
    const double sd = std::sqrt(n * 0.1 * 0.9);
    for (int b : bins) {
        CHECK(std::abs(b - expected) < 4.0 * sd);
    }
    for (std::size_t i = 0; i < s.clocks.size(); ++i) {
        REQUIRE(static_cast<bool>(s.flash_flags[i]) == (s.clocks[i] >= 5));
    }
    CHECK(init_state(p, 31337).clocks == s.clocks);
}

TEST_CASE("initial clocks do not depend on the noise level") {
    const auto quiet = init_state(make_params(50, 100, 0.0), 5);
    const auto noisy = init_state(make_params(50, 100, 0.6), 5);
    CHECK(quiet.clocks == noisy.clocks);
}

TEST_CASE("step: two flashing agents both advance") {
    // Hand trace: agent 0 ticks to 6 and sees agent 1 at 5 (flashing): 1 > 0.5, so 7.
    // Agent 1 ticks to 6 and sees agent 0 at 7 (flashing): advances to 7.
    const auto p = make_params(2);
    const std::vector<std::uint64_t> clocks{5, 5};
    auto s = init_state_explicit(p, clocks);
    StepStreams streams(1);
    step(s, Topology::complete(2), p, streams);
    CHECK(s.clocks == std::vector<std::uint64_t>{7, 7});
    CHECK(s.step == 1);

    reference::Config c;
    c.n = 2;
    c.horizon = 1;
    const auto ref = reference::run(c, reference::complete_graph(2), {5, 5}, 1);
    CHECK(ref.back() == std::vector<long long>{7, 7});
}

TEST_CASE("step: equal clocks stay equal for two agents") {
    const auto p = make_params(2, 200);
    const std::vector<std::uint64_t> clocks{0, 0};
    auto s = init_state_explicit(p, clocks);
    StepStreams streams(1);
    const auto topo = Topology::complete(2);
    for (int t = 0; t < 200; ++t) {
        step(s, topo, p, streams);
        REQUIRE(s.clocks[0] == s.clocks[1]);
    }
}

TEST_CASE("step: the two-block state of 100 agents is locked") {
    const auto p = make_params(100, 1000);
    const auto topo = Topology::complete(100);
    auto s = init_state_explicit(p, two_blocks(100));
    StepStreams streams(1);
    for (int t = 0; t < 1000; ++t) {
        step(s, topo, p, streams);
        REQUIRE(s.clocks[99] - s.clocks[0] == 5);  // offset never changes
        REQUIRE(s.flashing_count() == 50);
    }
    // Neither block ever meets quorum, so every clock advanced exactly T ticks.
    CHECK(s.clocks[0] == 1000);
    CHECK(s.clocks[99] == 1005);
}

TEST_CASE("simulate") {
    const auto p = make_params(30, 500);
    const auto topo = Topology::complete(30);

    SUBCASE("already synchronized swarm flashes together every cycle") {
        const std::vector<std::uint64_t> clocks(30, 3);
        const auto traj = simulate_from(p, topo, init_state_explicit(p, clocks), 9);
        CHECK(max_amplitude(traj) == 1.0);
        for (std::size_t t = 0; t + 10 <= traj.amplitude_series.size(); t += 10) {
            const auto begin = traj.amplitude_series.begin() + static_cast<long>(t);
            CHECK(*std::max_element(begin, begin + 10) == 1.0);
        }
    }

    SUBCASE("two-block lock keeps A_max at one half") {
        const auto p100 = make_params(100, 1000);
        const auto traj = simulate_from(p100, Topology::complete(100), init_state_explicit(p100, two_blocks(100)), 3);
        CHECK(max_amplitude(traj) == 0.5);
    }

    SUBCASE("same seed, same trajectory") {
        const auto a = simulate(make_params(30, 500, 0.3), topo, 77);
        const auto b = simulate(make_params(30, 500, 0.3), topo, 77);
        CHECK(a.amplitude_series == b.amplitude_series);
        CHECK(a.final_state.clocks == b.final_state.clocks);
        const auto c = simulate(make_params(30, 500, 0.3), topo, 78);
        CHECK_FALSE(a.final_state.clocks == c.final_state.clocks);
    }

    SUBCASE("trajectory metadata") {
        const auto traj = simulate(p, topo, 4);
        CHECK(traj.amplitude_series.size() == 500);
        CHECK(traj.flashing_counts.size() == 500);
        CHECK(traj.rng_seed == 4);
        CHECK(traj.params == p.settings());
        CHECK(traj.topology_summary.degree == 29);
        CHECK(traj.topology_summary.components == 1);
        CHECK(traj.final_state.step == 500);
        CHECK(traj.snapshots.empty());
    }
}

TEST_CASE("simulate rejects mismatched inputs") {
    CHECK_THROWS_AS(simulate(make_params(10, 100), Topology::complete(9), 1), std::invalid_argument);
}

TEST_CASE("snapshots at a fixed interval") {
    EngineOptions options;
    options.snapshot_interval = 100;
    const auto traj = simulate(make_params(12, 1000), Topology::ring(12), 6, options);
    REQUIRE(traj.snapshots.size() == 10);
    CHECK(traj.snapshots.front().step == 100);
    CHECK(traj.snapshots.back().step == 1000);
    CHECK(traj.snapshots.back().clocks == traj.final_state.clocks);
}

TEST_CASE("property: per-step clock delta is 1 or 2, and 2 only via the check phase") {
    for (double sigma : {0.0, 0.3, 1.0}) {
        for (Seed seed = 0; seed < 10; ++seed) {
            const auto p = make_params(25, 300, sigma);
            const auto topo = generate_k_regular(25, 4, seed);
            auto s = init_state(p, seed);
            StepStreams streams(seed);
            for (int t = 0; t < 300; ++t) {
                const auto before = s.clocks;
                step(s, topo, p, streams);
                for (std::size_t i = 0; i < before.size(); ++i) {
                    const auto delta = s.clocks[i] - before[i];
                    REQUIRE((delta == 1 || delta == 2));
                    if (delta == 2) {
                        REQUIRE(static_cast<int>((before[i] + 1) % 10) == p.quorum_check_phase());
                    }
                    REQUIRE(static_cast<bool>(s.flash_flags[i]) == (s.clocks[i] % 10 >= 5));
                }
            }
        }
    }
}

TEST_CASE("property: amplitude values are multiples of 1/N and A_max >= 1/N") {
    for (Seed seed = 0; seed < 20; ++seed) {
        const int n = 37;
        const auto p = make_params(n, 40, 0.2);
        const auto traj = simulate(p, generate_geometric(n, 0.3, seed), seed);
        for (std::size_t t = 0; t < traj.amplitude_series.size(); ++t) {
            const double scaled = traj.amplitude_series[t] * n;
            REQUIRE(std::abs(scaled - std::round(scaled)) < 1e-9);
            REQUIRE(traj.flashing_counts[t] == static_cast<int>(std::round(scaled)));
        }
        CHECK(max_amplitude(traj) >= 1.0 / n);
    }
}

TEST_CASE("noise level zero never consumes the noise stream") {
    // A zero-noise run must match the reference, which has no noise branch at sigma = 0.
    for (Seed seed = 0; seed < 20; ++seed) {
        reference::Config c;
        c.n = 8;
        c.horizon = 100;
        const auto clocks = reference::random_clocks(c, seed);
        const auto expected = reference::run(c, reference::ring_graph(8), clocks, seed);
        const auto traj = simulate(make_params(8, 100), Topology::ring(8), seed);
        std::vector<long long> got(traj.final_state.clocks.begin(), traj.final_state.clocks.end());
        CHECK(got == expected.back());
    }
}

TEST_CASE("oracle equivalence on small swarms") {
    for (int n = 3; n <= 6; ++n) {
        for (double sigma : {0.0, 0.3}) {
            for (Seed seed = 0; seed < 5; ++seed) {
                reference::Config c;
                c.n = n;
                c.horizon = 60;
                c.sigma = sigma;
                const auto expected =
                    reference::run(c, reference::complete_graph(n), reference::random_clocks(c, seed), seed);
                const auto p = make_params(n, 60, sigma);
                auto s = init_state(p, seed);
                StepStreams streams(seed);
                const auto topo = Topology::complete(n);
                for (int t = 1; t <= 60; ++t) {
                    step(s, topo, p, streams);
                    std::vector<long long> got(s.clocks.begin(), s.clocks.end());
                    REQUIRE(got == expected[static_cast<std::size_t>(t)]);
                }
            }
        }
    }
}

TEST_CASE("random update order is seeded and deterministic") {
    EngineOptions options;
    options.order = UpdateOrder::random_permutation;
    const auto p = make_params(40, 400);
    const auto topo = Topology::complete(40);
    const auto a = simulate(p, topo, 12, options);
    const auto b = simulate(p, topo, 12, options);
    CHECK(a.amplitude_series == b.amplitude_series);
    // Same initial clocks as the ascending run.
    CHECK(init_state(p, 12).clocks == init_state(p, 12).clocks);
}

TEST_CASE("amplitude CSV columns") {
    const auto traj = simulate_from(make_params(4, 10), Topology::complete(4),
                                    init_state_explicit(make_params(4, 10), std::vector<std::uint64_t>{4, 4, 4, 4}), 1);
    std::ostringstream os;
    write_amplitude_csv(os, traj);
    const auto text = os.str();
    CHECK(text.rfind("step,amplitude,flashing_count\n1,1,4\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 11);
}
