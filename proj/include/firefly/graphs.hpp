#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "firefly/rng.hpp"

namespace firefly {

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParityError : public GraphError {
public:
    using GraphError::GraphError;
};

class RetryExhausted : public GraphError {
public:
    using GraphError::GraphError;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

enum class Provenance { geometric, regular, custom };

std::string to_string(Provenance p);

using Edge = std::pair<int, int>;

/// Immutable undirected interaction graph stored as sorted neighbor lists.
class Topology {
public:
    // Builds symmetric neighbor lists from an undirected edge list. Rejects
    // self-loops, duplicate edges and out-of-range endpoints.
    static Topology from_edges(int n_agents, std::span<const Edge> edges, Provenance provenance,
                               double range = 0.0, int degree = 0, std::vector<Point> positions = {});

    // No normalization or validation; use check_topology() to inspect the result.
    static Topology from_neighbor_lists(std::vector<std::vector<int>> neighbor_lists,
                                        Provenance provenance = Provenance::custom);

    static Topology complete(int n_agents);
    static Topology ring(int n_agents);

    int n_agents() const noexcept { return static_cast<int>(neighbors_.size()); }
    std::span<const int> neighbors(int agent) const { return neighbors_[static_cast<std::size_t>(agent)]; }
    const std::vector<std::vector<int>>& neighbor_lists() const noexcept { return neighbors_; }

    Provenance provenance() const noexcept { return provenance_; }
    // Communication range r (geometric provenance only).
    double range() const noexcept { return range_; }
    // Degree k (regular provenance only).
    int degree() const noexcept { return degree_; }
    const std::vector<Point>& positions() const noexcept { return positions_; }

    // Each undirected edge once as (i, j) with i < j, sorted lexicographically.
    std::vector<Edge> edges() const;
    std::size_t edge_count() const;

    bool operator==(const Topology&) const = default;

private:
    std::vector<std::vector<int>> neighbors_;
    Provenance provenance_ = Provenance::custom;
    double range_ = 0.0;
    int degree_ = 0;
    std::vector<Point> positions_;
};

// Edge iff Euclidean distance is strictly less than range_r.
Topology geometric_from_positions(std::vector<Point> positions, double range_r);

Topology generate_geometric(int n, double range_r, Seed rng_seed);

inline constexpr int kDefaultMaxRetries = 1000;

/// Connected simple k-regular random graph. Sparse degrees use the pairing
/// (configuration) model with rejection of non-simple samples; denser degrees
/// randomize a circulant graph by degree-preserving double-edge swaps.
/// Disconnected samples are rejected and redrawn.
Topology generate_k_regular(int n, int k, Seed rng_seed, int max_retries = kDefaultMaxRetries);

// k = N - 1 - floor(sigma * N); throws GraphError when k < 1.
int degree_from_removal(int n, double removal_sigma);

struct TopologyReport {
    bool symmetric = true;
    int asymmetric_entries = 0;
    int self_loops = 0;
    int duplicates = 0;
    int out_of_range = 0;
    std::map<int, int> degree_histogram;  // degree -> number of agents
    std::vector<int> component_sizes;     // descending
    int components() const noexcept { return static_cast<int>(component_sizes.size()); }
    bool simple() const noexcept { return symmetric && self_loops == 0 && duplicates == 0 && out_of_range == 0; }
    bool regular(int k) const;
};

TopologyReport check_topology(const Topology& t);

// {n, provenance: {kind, r|k}, edges: [[i, j], ...], positions?: [[x, y], ...]}
std::string topology_to_json(const Topology& t);
Topology topology_from_json(const std::string& text);

} // namespace firefly
