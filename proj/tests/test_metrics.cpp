#include "doctest.h"

#include <cmath>
#include <sstream>

#include "firefly/metrics.hpp"

using namespace firefly;

namespace {

RunRecord sample_record(Seed seed, bool success, double a_max = 0.9) {
    RunRecord r;
    r.seed = seed;
    r.topology = "complete";
    r.k_or_r = 99;
    r.a_max = a_max;
    r.success = success;
    if (success) {
        r.time_to_sync = 42;
    }
    r.cluster_count_final = 1;
    return r;
}

} // namespace

TEST_CASE("max_amplitude") {
    const std::vector<double> series{0.2, 0.9, 0.5};
    CHECK(max_amplitude(series) == 0.9);
    const std::vector<double> synced{0.5, 1.0, 0.5};
    CHECK(max_amplitude(synced) == 1.0);
    CHECK_THROWS_AS(max_amplitude(std::vector<double>{}), MetricsError);
}

TEST_CASE("property: max_amplitude ignores everything after the argmax") {
    RandomStream rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> series(1 + rng.uniform_below(50));
        for (auto& v : series) v = static_cast<double>(rng.uniform_below(101)) / 100.0;
        const auto arg = std::max_element(series.begin(), series.end()) - series.begin();
        const std::span<const double> head(series.data(), static_cast<std::size_t>(arg) + 1);
        CHECK(max_amplitude(head) == max_amplitude(series));
    }
}

TEST_CASE("classify_success") {
    CHECK(classify_success(0.85, 0.85));
    CHECK_FALSE(classify_success(0.849, 0.85));
    CHECK(classify_success(1.0, 0.85));
    CHECK(classify_success(0.85));
}

TEST_CASE("property: classify_success is monotone in a_max and antitone in threshold") {
    for (int a = 0; a <= 100; ++a) {
        for (int t = 0; t <= 100; ++t) {
            const double amp = a / 100.0;
            const double thr = t / 100.0;
            if (classify_success(amp, thr)) {
                CHECK(classify_success(std::min(1.0, amp + 0.01), thr));
                CHECK(classify_success(amp, std::max(0.0, thr - 0.01)));
            }
        }
    }
}

TEST_CASE("time_to_sync is the first step reaching the threshold") {
    const std::vector<double> series{0.1, 0.86, 0.5, 0.9};
    CHECK(time_to_sync(series) == 2);
    CHECK_FALSE(time_to_sync(std::vector<double>{0.1, 0.2}).has_value());
}

TEST_CASE("phase_clusters") {
    const std::vector<int> same(20, 3);
    auto c = phase_clusters(same, 10, 1);
    CHECK(c.count == 1);
    CHECK(c.sizes == std::vector<int>{20});

    std::vector<int> halves(20, 0);
    std::fill(halves.begin() + 10, halves.end(), 5);
    c = phase_clusters(halves, 10, 2);
    CHECK(c.count == 2);
    CHECK(c.sizes == std::vector<int>{10, 10});

    std::vector<int> uniform;
    for (int i = 0; i < 30; ++i) uniform.push_back(i % 10);
    CHECK(phase_clusters(uniform, 10, 1).count == 1);
    CHECK(phase_clusters(uniform, 10, 3).count == 1);

    // a single empty bin separates only when gap_threshold is 1
    const std::vector<int> near{0, 0, 2, 2};
    CHECK(phase_clusters(near, 10, 1).count == 2);
    CHECK(phase_clusters(near, 10, 2).count == 1);

    // clusters wrapping around the cycle end
    const std::vector<int> wrap{9, 0, 0, 5};
    c = phase_clusters(wrap, 10, 1);
    CHECK(c.count == 2);

    CHECK(phase_clusters(std::vector<int>{}, 10, 1).count == 0);
    CHECK_THROWS_AS(phase_clusters(same, 10, 0), MetricsError);
    CHECK_THROWS_AS(phase_clusters(std::vector<int>{10}, 10, 1), MetricsError);
}

TEST_CASE("property: cluster count is invariant under phase rotation") {
    RandomStream rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const int cycle = 2 + static_cast<int>(rng.uniform_below(40));
        std::vector<int> phases(1 + rng.uniform_below(30));
        const int spread = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(cycle)));
        for (auto& p : phases) p = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(spread)));
        const int gap = 1 + static_cast<int>(rng.uniform_below(3));
        const auto base = phase_clusters(phases, cycle, gap);
        int total = 0;
        for (int s : base.sizes) total += s;
        CHECK(total == static_cast<int>(phases.size()));
        for (int shift = 1; shift < cycle; ++shift) {
            std::vector<int> rotated;
            for (int p : phases) rotated.push_back((p + shift) % cycle);
            REQUIRE(phase_clusters(rotated, cycle, gap).count == base.count);
        }
    }
}

TEST_CASE("success_fraction") {
    std::vector<RunRecord> records;
    for (int i = 0; i < 10; ++i) records.push_back(sample_record(i, i < 7));
    auto p = success_fraction(records);
    CHECK(p.fraction == doctest::Approx(0.7));
    CHECK(p.half_width == doctest::Approx(0.284).epsilon(0.002));

    p = success_fraction(10, 10);
    CHECK(p.fraction == 1.0);
    CHECK(p.half_width == 0.0);

    p = success_fraction(500, 1000);
    CHECK(p.half_width == doctest::Approx(0.031).epsilon(0.01));

    CHECK_THROWS_AS(success_fraction(std::vector<RunRecord>{}), MetricsError);
}

TEST_CASE("property: success and failure fractions are complementary") {
    for (std::size_t total = 1; total <= 60; ++total) {
        for (std::size_t wins = 0; wins <= total; ++wins) {
            const auto s = success_fraction(wins, total);
            const auto f = success_fraction(total - wins, total);
            CHECK(s.fraction >= 0.0);
            CHECK(s.fraction <= 1.0);
            CHECK(s.fraction == doctest::Approx(1.0 - f.fraction));
            CHECK(s.half_width == doctest::Approx(f.half_width));
        }
    }
}

TEST_CASE("run record CSV row") {
    CHECK(kRunRecordHeader ==
          "seed,n_agents,cycle_len,horizon,theta,f,sigma,topology,k_or_r,a_max,success,time_to_sync,cluster_count_final");
    auto r = sample_record(18446744073709551615ULL, true, 0.91);
    r.params.noise_level = 0.3;
    CHECK(to_csv_row(r) == "18446744073709551615,100,10,1000,0.5,0.5,0.3,complete,99,0.91,1,42,1");
    auto failed = sample_record(3, false, 0.5);
    failed.cluster_count_final.reset();
    CHECK(to_csv_row(failed) == "3,100,10,1000,0.5,0.5,0,complete,99,0.5,0,,");
}

TEST_CASE("property: CSV rows parse back to the same record") {
    RandomStream rng(8);
    for (int trial = 0; trial < 500; ++trial) {
        RunRecord r;
        r.seed = rng.next();
        r.params.n_agents = 2 + static_cast<int>(rng.uniform_below(500));
        r.params.cycle_len = 2 + static_cast<int>(rng.uniform_below(100));
        r.params.horizon = 1 + static_cast<int>(rng.uniform_below(100000));
        r.params.quorum_threshold = rng.uniform01();
        r.params.flash_fraction = rng.uniform01();
        r.params.noise_level = static_cast<double>(rng.uniform_below(11)) / 10.0;
        r.topology = rng.bernoulli(0.5) ? "geometric" : "regular";
        r.k_or_r = rng.uniform01() * 2;
        r.a_max = static_cast<double>(rng.uniform_below(r.params.n_agents + 1)) / r.params.n_agents;
        r.success = rng.bernoulli(0.5);
        if (r.success) r.time_to_sync = static_cast<int>(rng.uniform_below(10000));
        if (rng.bernoulli(0.8)) r.cluster_count_final = static_cast<int>(rng.uniform_below(10));
        REQUIRE(parse_csv_row(to_csv_row(r)) == r);
    }
}

TEST_CASE("reading result CSVs") {
    std::istringstream good(std::string(kRunRecordHeader) + "\n" + to_csv_row(sample_record(1, true)) + "\n" +
                            to_csv_row(sample_record(2, false)) + "\n");
    const auto records = read_run_records(good);
    REQUIRE(records.size() == 2);
    CHECK(records[1].seed == 2);

    std::istringstream empty("");
    CHECK_THROWS_AS(read_run_records(empty), CsvError);

    std::istringstream bad_header("seed,a_max\n1,0.5\n");
    CHECK_THROWS_AS(read_run_records(bad_header), CsvError);

    std::istringstream bad_row(std::string(kRunRecordHeader) + "\n" + to_csv_row(sample_record(1, true)) +
                               "\n1,2,3\n");
    try {
        read_run_records(bad_row);
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.line() == 3);
    }

    std::istringstream bad_number(std::string(kRunRecordHeader) + "\nx,100,10,1000,0.5,0.5,0,complete,99,1,1,1,1\n");
    CHECK_THROWS_AS(read_run_records(bad_number), CsvError);
}

TEST_CASE("aggregate groups by named columns in numeric order") {
    std::vector<RunRecord> records;
    for (int k : {20, 19, 9}) {
        for (int i = 0; i < 4; ++i) {
            auto r = sample_record(static_cast<Seed>(k * 10 + i), i < (k % 2 == 0 ? 3 : 1), 0.5 + 0.1 * i);
            r.topology = "regular";
            r.k_or_r = k;
            records.push_back(r);
        }
    }
    const std::vector<std::string> by{"k_or_r"};
    const auto groups = aggregate(records, by);
    REQUIRE(groups.size() == 3);
    CHECK(groups[0].key == std::vector<std::string>{"9"});
    CHECK(groups[2].key == std::vector<std::string>{"20"});
    CHECK(groups[2].proportion.fraction == doctest::Approx(0.75));
    CHECK(groups[0].proportion.fraction == doctest::Approx(0.25));
    CHECK(groups[0].mean_a_max == doctest::Approx(0.65));
    const std::vector<std::string> unknown{"nope"};
    CHECK_THROWS_AS(aggregate(records, unknown), MetricsError);
}
