// region.hpp - size-constrained region growing and the implicit net expansion network
#ifndef HYPERPART_FLOW_REGION_HPP
#define HYPERPART_FLOW_REGION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

#include "../partitioned_hypergraph.hpp"
#include "../types.hpp"
#include "max_flow.hpp"

namespace hyperpart {

// Nodes of a block pair selected for a flow problem. Nodes of each block not
// in the region act as contracted terminals with the given exterior weights.
struct FlowRegion {
    BlockId block_i = kNoBlock;
    BlockId block_j = kNoBlock;
    std::vector<NodeId> nodes;
    std::vector<char> side;  // 0: from block_i, 1: from block_j
    Weight exterior_i = 0;
    Weight exterior_j = 0;
    Weight region_weight = 0;
};

// Grows one side: BFS from the pair-boundary nodes of `block`, staying inside
// the block, adding nodes while the side stays within `bound` and the BFS
// layer stays within `max_layers`. Deterministic: seeds ascend by id, pins
// are walked in storage order.
namespace detail {
inline void grow_side(const PartitionedHypergraph& ph, BlockId block, BlockId other, Weight bound,
                      std::int32_t max_layers, std::vector<NodeId>& out) {
    const Hypergraph& h = ph.hypergraph();
    std::vector<std::int32_t> layer(h.num_nodes(), -1);
    std::deque<NodeId> queue;
    Weight used = 0;
    for (NodeId v = 0; v < h.num_nodes(); ++v) {
        if (ph.part(v) != block) continue;
        bool boundary = false;
        for (NetId e : h.incident_nets(v))
            if (ph.pin_count(e, other) > 0) {
                boundary = true;
                break;
            }
        if (!boundary) continue;
        if (used + h.node_weight(v) > bound) continue;
        used += h.node_weight(v);
        layer[v] = 0;
        queue.push_back(v);
        out.push_back(v);
    }
    while (!queue.empty()) {
        const NodeId v = queue.front();
        queue.pop_front();
        if (layer[v] >= max_layers) continue;
        for (NetId e : h.incident_nets(v)) {
            for (NodeId u : h.pins(e)) {
                if (layer[u] != -1 || ph.part(u) != block) continue;
                if (used + h.node_weight(u) > bound) {
                    layer[u] = -2;  // rejected; do not retry through another net
                    continue;
                }
                used += h.node_weight(u);
                layer[u] = layer[v] + 1;
                queue.push_back(u);
                out.push_back(u);
            }
        }
    }
}
}  // namespace detail

// Both sides of the region for the pair (block_i, block_j). Each side may
// grow up to (1 + alpha * epsilon) * ceil(c_pair / 2) - c(other block),
// where c_pair is the weight of the two-block subinstance.
inline FlowRegion construct_region(const PartitionedHypergraph& ph, BlockId block_i,
                                   BlockId block_j, double alpha, double epsilon,
                                   std::int32_t max_layers) {
    FlowRegion region;
    region.block_i = block_i;
    region.block_j = block_j;
    const Weight c_i = ph.block_weight(block_i);
    const Weight c_j = ph.block_weight(block_j);
    const Weight half = (c_i + c_j + 1) / 2;
    const auto scaled = static_cast<Weight>(std::floor((1.0 + alpha * epsilon) *
                                                       static_cast<double>(half)));
    const Weight bound_i = scaled - c_j;
    const Weight bound_j = scaled - c_i;

    std::vector<NodeId> side_i, side_j;
    if (bound_i > 0) detail::grow_side(ph, block_i, block_j, bound_i, max_layers, side_i);
    if (bound_j > 0) detail::grow_side(ph, block_j, block_i, bound_j, max_layers, side_j);

    const Hypergraph& h = ph.hypergraph();
    Weight w_i = 0, w_j = 0;
    for (NodeId v : side_i) w_i += h.node_weight(v);
    for (NodeId v : side_j) w_j += h.node_weight(v);
    region.exterior_i = c_i - w_i;
    region.exterior_j = c_j - w_j;
    region.region_weight = w_i + w_j;
    region.nodes.reserve(side_i.size() + side_j.size());
    region.side.reserve(side_i.size() + side_j.size());
    for (NodeId v : side_i) {
        region.nodes.push_back(v);
        region.side.push_back(0);
    }
    for (NodeId v : side_j) {
        region.nodes.push_back(v);
        region.side.push_back(1);
    }
    return region;
}

// Flow problem over the region: vertex 0 is the contracted source (rest of
// block_i), vertex 1 the contracted sink (rest of block_j), then one vertex
// per region node and an (e_in, e_out) pair per modelled net. Every pin arc
// carries the tightened capacity w(e) and is soft (infinite when deriving cut
// sides); the bridge e_in -> e_out is the only cuttable arc. Nets whose pins
// inside the pair map to a single network vertex cannot change the pair cut
// and are skipped; nets collapsing to exactly {source, sink} are cut no
// matter what and their weight goes to forced_cut instead.
struct RegionFlowProblem {
    FlowNetwork net{2};
    std::vector<NetId> modelled_nets;
    std::vector<std::int32_t> bridge_arc;   // per modelled net
    std::vector<std::int32_t> node_vertex;  // per region node index
    Weight forced_cut = 0;
    Weight pair_cut_before = 0;
};

inline RegionFlowProblem build_region_network(const PartitionedHypergraph& ph,
                                              const FlowRegion& region) {
    const Hypergraph& h = ph.hypergraph();
    RegionFlowProblem problem;

    std::vector<std::int32_t> vertex_of(h.num_nodes(), -1);
    std::int32_t next_vertex = 2;
    problem.node_vertex.resize(region.nodes.size());
    for (std::size_t idx = 0; idx < region.nodes.size(); ++idx) {
        vertex_of[region.nodes[idx]] = next_vertex;
        problem.node_vertex[idx] = next_vertex;
        ++next_vertex;
    }

    std::vector<NetId> relevant;
    std::vector<char> seen(h.num_nets(), 0);
    for (NodeId v : region.nodes)
        for (NetId e : h.incident_nets(v))
            if (!seen[e]) {
                seen[e] = 1;
                relevant.push_back(e);
            }
    std::sort(relevant.begin(), relevant.end());

    struct NetPlan {
        NetId net;
        std::vector<std::int32_t> endpoints;
    };
    std::vector<NetPlan> plans;
    for (NetId e : relevant) {
        std::vector<std::int32_t> endpoints;
        for (NodeId u : h.pins(e)) {
            std::int32_t vertex;
            if (vertex_of[u] != -1) vertex = vertex_of[u];
            else if (ph.part(u) == region.block_i) vertex = 0;
            else if (ph.part(u) == region.block_j) vertex = 1;
            else continue;  // pins in other blocks do not affect the pair cut
            if (std::find(endpoints.begin(), endpoints.end(), vertex) == endpoints.end())
                endpoints.push_back(vertex);
        }
        if (endpoints.size() < 2) continue;
        if (endpoints.size() == 2 && endpoints[0] <= 1 && endpoints[1] <= 1) continue;
        plans.push_back({e, std::move(endpoints)});
    }

    problem.net = FlowNetwork(next_vertex + 2 * static_cast<std::int32_t>(plans.size()));
    for (const NetPlan& plan : plans) {
        const Weight w = h.net_weight(plan.net);
        const std::int32_t e_in = next_vertex++;
        const std::int32_t e_out = next_vertex++;
        problem.modelled_nets.push_back(plan.net);
        problem.bridge_arc.push_back(problem.net.add_arc(e_in, e_out, w));
        for (const std::int32_t p : plan.endpoints) {
            problem.net.add_arc(p, e_in, w, true);
            problem.net.add_arc(e_out, p, w, true);
        }
    }

    // Every net spanning both blocks counts toward the current pair cut;
    // the ones not modelled (no region pin, or both pin classes collapsed
    // onto the terminals) stay cut whatever the solver does.
    std::vector<char> modelled(h.num_nets(), 0);
    for (NetId e : problem.modelled_nets) modelled[e] = 1;
    for (NetId e = 0; e < h.num_nets(); ++e)
        if (ph.pin_count(e, region.block_i) > 0 && ph.pin_count(e, region.block_j) > 0) {
            problem.pair_cut_before += h.net_weight(e);
            if (!modelled[e]) problem.forced_cut += h.net_weight(e);
        }
    return problem;
}

}  // namespace hyperpart

#endif
