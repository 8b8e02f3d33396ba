#include "firefly/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "json.hpp"

namespace firefly {

namespace {

using AdjacencyMatrix = std::vector<std::uint8_t>;

std::vector<int> component_sizes(const std::vector<std::vector<int>>& neighbors) {
    const int n = static_cast<int>(neighbors.size());
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> sizes;
    std::deque<int> queue;
    for (int start = 0; start < n; ++start) {
        if (seen[static_cast<std::size_t>(start)]) {
            continue;
        }
        int size = 0;
        seen[static_cast<std::size_t>(start)] = 1;
        queue.push_back(start);
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            ++size;
            for (int w : neighbors[static_cast<std::size_t>(v)]) {
                if (w >= 0 && w < n && !seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    queue.push_back(w);
                }
            }
        }
        sizes.push_back(size);
    }
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    return sizes;
}

std::vector<std::vector<int>> lists_from_edges(int n, std::span<const Edge> edges) {
    std::vector<std::vector<int>> lists(static_cast<std::size_t>(n));
    for (const auto& [a, b] : edges) {
        lists[static_cast<std::size_t>(a)].push_back(b);
        lists[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& l : lists) {
        std::sort(l.begin(), l.end());
    }
    return lists;
}

// One draw of the pairing model: k stubs per vertex, matched uniformly.
// Returns nothing when the pairing produced a loop or a multi-edge.
std::optional<std::vector<Edge>> pairing_sample(int n, int k, RandomStream& rng) {
    std::vector<int> stubs;
    stubs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
    for (int v = 0; v < n; ++v) {
        for (int j = 0; j < k; ++j) {
            stubs.push_back(v);
        }
    }
    // Fisher-Yates with the portable draw.
    for (std::size_t i = stubs.size(); i > 1; --i) {
        const std::size_t j = rng.uniform_below(i);
        std::swap(stubs[i - 1], stubs[j]);
    }
    AdjacencyMatrix adj(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
    std::vector<Edge> edges;
    edges.reserve(stubs.size() / 2);
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
        const int a = std::min(stubs[i], stubs[i + 1]);
        const int b = std::max(stubs[i], stubs[i + 1]);
        auto& cell = adj[static_cast<std::size_t>(a) * static_cast<std::size_t>(n) + static_cast<std::size_t>(b)];
        if (a == b || cell) {
            return std::nullopt;
        }
        cell = 1;
        edges.emplace_back(a, b);
    }
    return edges;
}

// k-circulant randomized by double-edge swaps that keep the graph simple.
std::vector<Edge> switched_circulant(int n, int k, RandomStream& rng) {
    std::vector<Edge> edges;
    for (int d = 1; d <= k / 2; ++d) {
        for (int i = 0; i < n; ++i) {
            const int j = (i + d) % n;
            edges.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    if (k % 2 == 1) {
        for (int i = 0; i < n / 2; ++i) {
            edges.emplace_back(i, i + n / 2);
        }
    }
    const auto nn = static_cast<std::size_t>(n);
    AdjacencyMatrix adj(nn * nn, 0);
    auto cell = [&](int a, int b) -> std::uint8_t& {
        return adj[static_cast<std::size_t>(a) * nn + static_cast<std::size_t>(b)];
    };
    for (const auto& [a, b] : edges) {
        cell(a, b) = cell(b, a) = 1;
    }
    const std::size_t m = edges.size();
    if (m < 2) {
        return edges;
    }
    const std::size_t target = 10 * m;
    const std::size_t max_attempts = 100 * m;
    std::size_t accepted = 0;
    for (std::size_t attempt = 0; attempt < max_attempts && accepted < target; ++attempt) {
        const std::size_t e1 = rng.uniform_below(m);
        const std::size_t e2 = rng.uniform_below(m);
        if (e1 == e2) {
            continue;
        }
        auto [a, b] = edges[e1];
        auto [c, d] = edges[e2];
        if (rng.uniform_below(2) == 1) {
            std::swap(c, d);
        }
        // (a,b),(c,d) -> (a,d),(c,b)
        if (a == d || c == b || cell(a, d) || cell(c, b)) {
            continue;
        }
        cell(a, b) = cell(b, a) = 0;
        cell(c, d) = cell(d, c) = 0;
        cell(a, d) = cell(d, a) = 1;
        cell(c, b) = cell(b, c) = 1;
        edges[e1] = {std::min(a, d), std::max(a, d)};
        edges[e2] = {std::min(c, b), std::max(c, b)};
        ++accepted;
    }
    return edges;
}

// Pairing-model acceptance decays like exp(-(k^2 - 1) / 4); beyond this
// degree it drops under 1% and edge switching is used instead.
constexpr int kMaxPairingDegree = 4;
constexpr int kMaxPairingDraws = 100000;

std::optional<std::vector<Edge>> sample_simple_regular(int n, int k, RandomStream& rng) {
    if (k == 0) {
        return std::vector<Edge>{};
    }
    if (k <= kMaxPairingDegree) {
        // Loops and multi-edges are redrawn here so they never consume the
        // caller's connectivity retries.
        for (int draw = 0; draw < kMaxPairingDraws; ++draw) {
            if (auto edges = pairing_sample(n, k, rng)) {
                return edges;
            }
        }
        return std::nullopt;
    }
    return switched_circulant(n, k, rng);
}

std::vector<Edge> complement_edges(int n, std::span<const Edge> edges) {
    const auto nn = static_cast<std::size_t>(n);
    AdjacencyMatrix adj(nn * nn, 0);
    for (const auto& [a, b] : edges) {
        adj[static_cast<std::size_t>(a) * nn + static_cast<std::size_t>(b)] = 1;
    }
    std::vector<Edge> out;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (!adj[static_cast<std::size_t>(a) * nn + static_cast<std::size_t>(b)]) {
                out.emplace_back(a, b);
            }
        }
    }
    return out;
}

} // namespace

std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::geometric:
        return "geometric";
    case Provenance::regular:
        return "regular";
    case Provenance::custom:
        return "custom";
    }
    return "custom";
}

Topology Topology::from_edges(int n_agents, std::span<const Edge> edges, Provenance provenance, double range,
                              int degree, std::vector<Point> positions) {
    if (n_agents < 1) {
        throw GraphError("topology needs at least one agent");
    }
    std::vector<Edge> normalized;
    normalized.reserve(edges.size());
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || a >= n_agents || b >= n_agents) {
            throw GraphError("edge endpoint out of range: (" + std::to_string(a) + ", " + std::to_string(b) + ")");
        }
        if (a == b) {
            throw GraphError("self-loop at agent " + std::to_string(a));
        }
        normalized.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(normalized.begin(), normalized.end());
    if (std::adjacent_find(normalized.begin(), normalized.end()) != normalized.end()) {
        throw GraphError("duplicate edge");
    }
    Topology t;
    t.neighbors_ = lists_from_edges(n_agents, normalized);
    t.provenance_ = provenance;
    t.range_ = range;
    t.degree_ = degree;
    t.positions_ = std::move(positions);
    return t;
}

Topology Topology::from_neighbor_lists(std::vector<std::vector<int>> neighbor_lists, Provenance provenance) {
    Topology t;
    t.neighbors_ = std::move(neighbor_lists);
    t.provenance_ = provenance;
    return t;
}

Topology Topology::complete(int n_agents) {
    std::vector<Edge> edges;
    for (int a = 0; a < n_agents; ++a) {
        for (int b = a + 1; b < n_agents; ++b) {
            edges.emplace_back(a, b);
        }
    }
    return from_edges(n_agents, edges, Provenance::regular, 0.0, n_agents - 1);
}

Topology Topology::ring(int n_agents) {
    if (n_agents < 3) {
        throw GraphError("a ring needs at least 3 agents");
    }
    std::vector<Edge> edges;
    for (int a = 0; a < n_agents; ++a) {
        edges.emplace_back(a, (a + 1) % n_agents);
    }
    return from_edges(n_agents, edges, Provenance::regular, 0.0, 2);
}

std::vector<Edge> Topology::edges() const {
    std::vector<Edge> out;
    for (int a = 0; a < n_agents(); ++a) {
        for (int b : neighbors_[static_cast<std::size_t>(a)]) {
            if (a < b) {
                out.emplace_back(a, b);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t Topology::edge_count() const {
    return edges().size();
}

Topology geometric_from_positions(std::vector<Point> positions, double range_r) {
    if (range_r < 0.0) {
        throw GraphError("range must be non-negative");
    }
    const int n = static_cast<int>(positions.size());
    const double r2 = range_r * range_r;
    std::vector<Edge> edges;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const double dx = positions[static_cast<std::size_t>(a)].x - positions[static_cast<std::size_t>(b)].x;
            const double dy = positions[static_cast<std::size_t>(a)].y - positions[static_cast<std::size_t>(b)].y;
            if (dx * dx + dy * dy < r2) {
                edges.emplace_back(a, b);
            }
        }
    }
    return Topology::from_edges(n, edges, Provenance::geometric, range_r, 0, std::move(positions));
}

Topology generate_geometric(int n, double range_r, Seed rng_seed) {
    if (n < 2) {
        throw GraphError("geometric graph needs n >= 2");
    }
    RandomStream rng(rng_seed);
    std::vector<Point> positions(static_cast<std::size_t>(n));
    for (auto& p : positions) {
        p.x = rng.uniform01();
        p.y = rng.uniform01();
    }
    return geometric_from_positions(std::move(positions), range_r);
}

Topology generate_k_regular(int n, int k, Seed rng_seed, int max_retries) {
    if (n < 2) {
        throw GraphError("regular graph needs n >= 2");
    }
    if (k < 1 || k > n - 1) {
        throw GraphError("degree k=" + std::to_string(k) + " outside [1, " + std::to_string(n - 1) + "]");
    }
    if ((static_cast<long long>(n) * k) % 2 != 0) {
        throw ParityError("no " + std::to_string(k) + "-regular graph on " + std::to_string(n) +
                          " vertices: n*k is odd");
    }
    if (k == n - 1) {
        return Topology::complete(n);
    }
    // Dense degrees are drawn as the complement of a sparse regular graph.
    const bool via_complement = k > (n - 1) / 2;
    const int sample_degree = via_complement ? n - 1 - k : k;
    RandomStream rng(rng_seed);
    for (int attempt = 0; attempt < std::max(1, max_retries); ++attempt) {
        auto edges = sample_simple_regular(n, sample_degree, rng);
        if (!edges) {
            continue;
        }
        if (via_complement) {
            *edges = complement_edges(n, *edges);
        }
        auto lists = lists_from_edges(n, *edges);
        if (component_sizes(lists).size() == 1) {
            return Topology::from_edges(n, *edges, Provenance::regular, 0.0, k);
        }
    }
    throw RetryExhausted("no connected simple " + std::to_string(k) + "-regular graph on " + std::to_string(n) +
                         " vertices after " + std::to_string(max_retries) + " attempts");
}

int degree_from_removal(int n, double removal_sigma) {
    if (!(removal_sigma >= 0.0 && removal_sigma <= 1.0)) {
        throw GraphError("removal sigma must lie in [0, 1]");
    }
    // Same decimal slack as the flash window: floor(0.7 * 100) must be 70.
    const double removed = removal_sigma * static_cast<double>(n);
    const double nearest = std::round(removed);
    const int floor_removed =
        std::abs(removed - nearest) <= 1e-9 * std::max(1.0, removed) ? static_cast<int>(nearest)
                                                                      : static_cast<int>(std::floor(removed));
    const int k = n - 1 - floor_removed;
    if (k < 1) {
        throw GraphError("link removal sigma=" + std::to_string(removal_sigma) + " leaves degree " +
                         std::to_string(k) + " for n=" + std::to_string(n));
    }
    return k;
}

bool TopologyReport::regular(int k) const {
    return degree_histogram.size() == 1 && degree_histogram.begin()->first == k;
}

TopologyReport check_topology(const Topology& t) {
    TopologyReport report;
    const int n = t.n_agents();
    const auto& lists = t.neighbor_lists();
    for (int i = 0; i < n; ++i) {
        const auto& l = lists[static_cast<std::size_t>(i)];
        report.degree_histogram[static_cast<int>(l.size())] += 1;
        std::vector<int> sorted(l.begin(), l.end());
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t idx = 0; idx < sorted.size(); ++idx) {
            const int j = sorted[idx];
            if (idx > 0 && sorted[idx - 1] == j) {
                ++report.duplicates;
            }
            if (j < 0 || j >= n) {
                ++report.out_of_range;
                continue;
            }
            if (j == i) {
                ++report.self_loops;
            }
            const auto& back = lists[static_cast<std::size_t>(j)];
            if (std::find(back.begin(), back.end(), i) == back.end()) {
                ++report.asymmetric_entries;
            }
        }
    }
    report.symmetric = report.asymmetric_entries == 0;
    report.component_sizes = component_sizes(lists);
    return report;
}

std::string topology_to_json(const Topology& t) {
    nlohmann::ordered_json doc;
    doc["n"] = t.n_agents();
    nlohmann::ordered_json prov;
    prov["kind"] = to_string(t.provenance());
    if (t.provenance() == Provenance::geometric) {
        prov["r"] = t.range();
    } else if (t.provenance() == Provenance::regular) {
        prov["k"] = t.degree();
    }
    doc["provenance"] = prov;
    auto edges = nlohmann::ordered_json::array();
    for (const auto& [a, b] : t.edges()) {
        edges.push_back({a, b});
    }
    doc["edges"] = edges;
    if (!t.positions().empty()) {
        auto pos = nlohmann::ordered_json::array();
        for (const auto& p : t.positions()) {
            pos.push_back({p.x, p.y});
        }
        doc["positions"] = pos;
    }
    return doc.dump();
}

Topology topology_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
        const int n = doc.at("n").get<int>();
        const auto& prov = doc.at("provenance");
        const std::string kind = prov.at("kind").get<std::string>();
        std::vector<Edge> edges;
        for (const auto& e : doc.at("edges")) {
            edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        }
        std::vector<Point> positions;
        if (doc.contains("positions")) {
            for (const auto& p : doc.at("positions")) {
                positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            }
        }
        if (kind == "geometric") {
            return Topology::from_edges(n, edges, Provenance::geometric, prov.at("r").get<double>(), 0,
                                        std::move(positions));
        }
        if (kind == "regular") {
            return Topology::from_edges(n, edges, Provenance::regular, 0.0, prov.at("k").get<int>(),
                                        std::move(positions));
        }
        if (kind == "custom") {
            return Topology::from_edges(n, edges, Provenance::custom, 0.0, 0, std::move(positions));
        }
        throw GraphError("unknown provenance kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw GraphError(std::string("malformed topology JSON: ") + e.what());
    }
}

} // namespace firefly
