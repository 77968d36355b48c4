#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "v2x/linalg.hpp"
#include "v2x/mobility.hpp"
#include "v2x/rng.hpp"

namespace v2x {

/// Directed V2V pair; doubles as graph-node identity and agent identity.
struct LinkLabel {
    int tx = -1;
    int rx = -1;
    auto operator<=>(const LinkLabel&) const = default;
};

/// Link graph over one snapshot of the vehicle set. Nodes are V2V links;
/// two nodes are adjacent when they share a transmitter or receiver vehicle.
/// Immutable between large-scale rebuilds.
struct GraphTopology {
    std::vector<LinkLabel> nodes;                // sorted by (tx, rx)
    std::vector<std::vector<int>> neighbors;     // sorted node indices
    std::vector<int> vehicle_ids;                // row order of tx_distance
    Matrix tx_distance;                          // vehicle-to-vehicle distances (m)
    double max_distance = 0.0;

    int vehicle_count() const { return static_cast<int>(vehicle_ids.size()); }
    int node_count() const { return static_cast<int>(nodes.size()); }
    int node_index(const LinkLabel& label) const;  // -1 when absent
    int vehicle_row(int vehicle_id) const;

    /// Proximity weight between the transmitters of two nodes: 1 - d/max(D).
    /// All-co-located snapshots (max(D) = 0) weigh every edge 1.
    double edge_weight(int node_u, int node_v) const;

private:
    std::unordered_map<int, int> vehicle_row_;
    friend GraphTopology build_graph(const std::vector<Vehicle>&);
};

/// Builds the graph from the current vehicle set. Every vehicle must carry
/// exactly 3 valid destinations.
GraphTopology build_graph(const std::vector<Vehicle>& vehicles);

/// Fixed-fanout neighbor samples for a two-layer aggregation rooted at one node.
struct SampledNeighborhood {
    int root = -1;
    std::vector<int> first;                 // exactly S entries
    std::vector<std::vector<int>> second;   // second[i]: S samples around first[i]
    bool isolated_fallback = false;         // an empty pool forced self-sampling
};

/// Uniform sampling, without replacement when the pool has at least S nodes,
/// with replacement otherwise. layers is 1 or 2.
SampledNeighborhood sample_neighborhood(const GraphTopology& topo, int node, int layers, int fanout,
                                        Rng& rng);

enum class GraphMode { complete, implicit };

/// Multiplication count of a single-layer aggregation pass over the whole
/// graph, with the nominal neighbor count of each construction.
std::uint64_t count_aggregation_ops(int vehicle_count, GraphMode mode, int d_in = 60, int d_out = 20);

/// Line-oriented dump (nodes, then weighted edges) for inspection and golden files.
std::string graph_to_text(const GraphTopology& topo);

}  // namespace v2x
