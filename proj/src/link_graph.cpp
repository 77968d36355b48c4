#include "v2x/link_graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "v2x/errors.hpp"

namespace v2x {

int GraphTopology::node_index(const LinkLabel& label) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), label);
    if (it == nodes.end() || *it != label) return -1;
    return static_cast<int>(it - nodes.begin());
}

int GraphTopology::vehicle_row(int vehicle_id) const {
    auto it = vehicle_row_.find(vehicle_id);
    return it == vehicle_row_.end() ? -1 : it->second;
}

double GraphTopology::edge_weight(int node_u, int node_v) const {
    if (max_distance <= 0.0) return 1.0;
    const int ru = vehicle_row(nodes.at(node_u).tx);
    const int rv = vehicle_row(nodes.at(node_v).tx);
    return 1.0 - tx_distance(ru, rv) / max_distance;
}

GraphTopology build_graph(const std::vector<Vehicle>& vehicles) {
    GraphTopology topo;
    const int s = static_cast<int>(vehicles.size());
    topo.vehicle_ids.reserve(s);
    for (const auto& v : vehicles) topo.vehicle_ids.push_back(v.id);
    std::sort(topo.vehicle_ids.begin(), topo.vehicle_ids.end());
    for (int r = 0; r < s; ++r) topo.vehicle_row_[topo.vehicle_ids[r]] = r;

    std::vector<const Vehicle*> by_row(s);
    for (const auto& v : vehicles) by_row[topo.vehicle_row_.at(v.id)] = &v;

    topo.tx_distance = Matrix(s, s);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
            const double d = vehicle_distance(*by_row[i], *by_row[j]);
            topo.tx_distance(i, j) = d;
            topo.max_distance = std::max(topo.max_distance, d);
        }

    for (const auto& v : vehicles) {
        for (int dest : v.destinations) {
            if (dest < 0 || dest == v.id || topo.vehicle_row(dest) < 0)
                throw StructuralError("vehicle " + std::to_string(v.id) + " has an invalid destination");
        }
        if (v.destinations[0] == v.destinations[1] || v.destinations[1] == v.destinations[2] ||
            v.destinations[0] == v.destinations[2])
            throw StructuralError("vehicle " + std::to_string(v.id) + " has duplicate destinations");
        for (int dest : v.destinations) topo.nodes.push_back(LinkLabel{v.id, dest});
    }
    std::sort(topo.nodes.begin(), topo.nodes.end());

    // Nodes attached to each vehicle, as transmitter or receiver.
    std::unordered_map<int, std::vector<int>> touching;
    for (int n = 0; n < topo.node_count(); ++n) {
        touching[topo.nodes[n].tx].push_back(n);
        touching[topo.nodes[n].rx].push_back(n);
    }
    topo.neighbors.assign(topo.node_count(), {});
    for (int n = 0; n < topo.node_count(); ++n) {
        auto& nb = topo.neighbors[n];
        for (int veh : {topo.nodes[n].tx, topo.nodes[n].rx})
            for (int other : touching[veh])
                if (other != n) nb.push_back(other);
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return topo;
}

SampledNeighborhood sample_neighborhood(const GraphTopology& topo, int node, int layers, int fanout,
                                        Rng& rng) {
    if (node < 0 || node >= topo.node_count()) throw StructuralError("sample_neighborhood: node out of range");
    if (layers < 1 || layers > 2) throw StructuralError("sample_neighborhood: layers must be 1 or 2");

    SampledNeighborhood out;
    out.root = node;
    auto sample_pool = [&](int center) {
        const auto& pool = topo.neighbors.at(center);
        std::vector<int> picks;
        picks.reserve(fanout);
        if (pool.empty()) {
            out.isolated_fallback = true;
            picks.assign(fanout, center);
        } else if (static_cast<int>(pool.size()) >= fanout) {
            auto idx = rng.sample_without_replacement(static_cast<int>(pool.size()), fanout);
            for (int i : idx) picks.push_back(pool[i]);
        } else {
            for (int i = 0; i < fanout; ++i) picks.push_back(pool[rng.uniform_int(static_cast<int>(pool.size()))]);
        }
        return picks;
    };

    out.first = sample_pool(node);
    if (layers == 2) {
        out.second.reserve(out.first.size());
        for (int u : out.first) out.second.push_back(sample_pool(u));
    }
    return out;
}

std::uint64_t count_aggregation_ops(int vehicle_count, GraphMode mode, int d_in, int d_out) {
    const std::uint64_t nodes = 3ULL * static_cast<std::uint64_t>(vehicle_count);
    const std::uint64_t nei = mode == GraphMode::complete ? nodes - 1 : 12ULL;
    return static_cast<std::uint64_t>(d_in) * static_cast<std::uint64_t>(d_out) * nodes * nei;
}

std::string graph_to_text(const GraphTopology& topo) {
    std::ostringstream os;
    os.precision(10);
    os << "# nodes " << topo.node_count() << " vehicles " << topo.vehicle_count() << " max_distance "
       << topo.max_distance << "\n";
    for (int n = 0; n < topo.node_count(); ++n)
        os << "node " << n << " " << topo.nodes[n].tx << " " << topo.nodes[n].rx << "\n";
    for (int n = 0; n < topo.node_count(); ++n)
        for (int u : topo.neighbors[n])
            if (u > n) os << "edge " << n << " " << u << " " << topo.edge_weight(n, u) << "\n";
    return os.str();
}

}  // namespace v2x
