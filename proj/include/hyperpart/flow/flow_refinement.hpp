// flow_refinement.hpp - FlowCutter on block-pair regions with active-block scheduling
#ifndef HYPERPART_FLOW_FLOW_REFINEMENT_HPP
#define HYPERPART_FLOW_FLOW_REFINEMENT_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <mutex>
#include <tuple>
#include <utility>
#include <vector>

#include "../parallel/parallel.hpp"
#include "../partitioned_hypergraph.hpp"
#include "../types.hpp"
#include "../util/random.hpp"
#include "max_flow.hpp"
#include "region.hpp"

namespace hyperpart {

struct FlowCutterConfig {
    Weight cap_i = 0;
    Weight cap_j = 0;
    int bulk_threshold = 4;  // single piercings before switching to bulk steps
    bool deterministic_ties = false;
    std::uint64_t seed = 0;
};

struct FlowCutterResult {
    bool feasible = false;
    Gain expected_delta = -1;
    std::vector<Move> moves;
    // One entry per solve iteration: flow value, committed terminal-set
    // weights, and whether the piercing closing the iteration hit a node of
    // the opposite residual set (such pierces may raise the next flow value).
    struct Iteration {
        Weight flow;
        Weight source_set;
        Weight sink_set;
        bool pierced_into_opposite = false;
    };
    std::vector<Iteration> trace;
};

// Incremental min-cut search: repeatedly solve max preflow, check whether
// either residual-derived side induces a balanced bipartition of the pair,
// and otherwise pierce nodes on the lighter committed side into its terminal.
// Piercing prefers nodes outside the opposite residual set (those keep the
// cut weight unchanged), then smaller hypergraph distance from the current
// cut. After bulk_threshold single piercings each step targets half of the
// remaining gap to a perfectly balanced side, estimated by the mean node
// weight pierced so far.
inline FlowCutterResult run_flowcutter(const PartitionedHypergraph& ph, const FlowRegion& region,
                                       RegionFlowProblem& problem, const FlowCutterConfig& cfg) {
    const Hypergraph& h = ph.hypergraph();
    FlowCutterResult result;
    PushRelabel solver(problem.net);
    solver.set_source(0);
    solver.set_sink(1);

    const std::size_t r = region.nodes.size();
    std::vector<char> assigned(r, 0);  // 0 none, 1 source terminal, 2 sink terminal
    Weight source_set = region.exterior_i;
    Weight sink_set = region.exterior_j;
    const Weight c_pair = region.exterior_i + region.exterior_j + region.region_weight;
    Weight pierced_weight = 0;
    std::int64_t pierced_nodes = 0;
    int single_pierces = 0;

    std::vector<std::int32_t> region_index(h.num_nodes(), -1);
    for (std::size_t idx = 0; idx < r; ++idx) region_index[region.nodes[idx]] = static_cast<std::int32_t>(idx);

    const std::size_t max_iterations = 2 * r + 8;
    for (std::size_t iteration = 0; iteration < max_iterations; ++iteration) {
        const Weight flow = solver.solve();
        const std::vector<char> src_reach = solver.source_side();
        const std::vector<char> snk_reach = solver.sink_side();
        result.trace.push_back({flow, source_set, sink_set, false});

        Weight w_src_side = region.exterior_i;
        Weight w_snk_side = region.exterior_j;
        for (std::size_t idx = 0; idx < r; ++idx) {
            if (src_reach[problem.node_vertex[idx]]) w_src_side += h.node_weight(region.nodes[idx]);
            if (snk_reach[problem.node_vertex[idx]]) w_snk_side += h.node_weight(region.nodes[idx]);
        }

        const bool a_balanced = w_src_side <= cfg.cap_i && c_pair - w_src_side <= cfg.cap_j;
        const bool b_balanced = w_snk_side <= cfg.cap_j && c_pair - w_snk_side <= cfg.cap_i;
        if (a_balanced || b_balanced) {
            result.feasible = true;
            for (std::size_t idx = 0; idx < r; ++idx) {
                const bool to_i = a_balanced ? src_reach[problem.node_vertex[idx]] != 0
                                             : snk_reach[problem.node_vertex[idx]] == 0;
                const BlockId target = to_i ? region.block_i : region.block_j;
                const BlockId origin = region.side[idx] == 0 ? region.block_i : region.block_j;
                if (target != origin) result.moves.push_back({region.nodes[idx], origin, target});
            }
            result.expected_delta = problem.pair_cut_before - (flow + problem.forced_cut);
            return result;
        }

        // Candidates for one side: unassigned region nodes outside that
        // side's residual set, keyed by BFS distance from the pins of the
        // bridges crossing the side's cut.
        std::vector<std::int64_t> distance;
        auto collect = [&](bool towards_source) {
            const std::vector<char>& own = towards_source ? src_reach : snk_reach;
            std::vector<NodeId> frontier;
            for (std::size_t m = 0; m < problem.modelled_nets.size(); ++m) {
                const std::int32_t bridge = problem.bridge_arc[m];
                const std::int32_t e_out = problem.net.arcs[bridge].to;
                const std::int32_t e_in = problem.net.arcs[bridge ^ 1].to;
                const bool crossing =
                    towards_source ? own[e_in] && !own[e_out] : own[e_out] && !own[e_in];
                if (!crossing) continue;
                for (NodeId u : h.pins(problem.modelled_nets[m]))
                    if (region_index[u] != -1) frontier.push_back(u);
            }
            distance.assign(r, std::numeric_limits<std::int64_t>::max());
            std::deque<NodeId> queue;
            for (NodeId u : frontier) {
                const std::int32_t idx = region_index[u];
                if (distance[idx] == 0) continue;
                distance[idx] = 0;
                queue.push_back(u);
            }
            while (!queue.empty()) {
                const NodeId v = queue.front();
                queue.pop_front();
                for (NetId e : h.incident_nets(v))
                    for (NodeId u : h.pins(e)) {
                        const std::int32_t idx = region_index[u];
                        if (idx == -1 ||
                            distance[idx] != std::numeric_limits<std::int64_t>::max())
                            continue;
                        distance[idx] = distance[region_index[v]] + 1;
                        queue.push_back(u);
                    }
            }
            std::vector<std::size_t> found;
            for (std::size_t idx = 0; idx < r; ++idx)
                if (assigned[idx] == 0 && !own[problem.node_vertex[idx]]) found.push_back(idx);
            return found;
        };

        // Prefer the lighter committed side; when its residual set already
        // swallowed every unassigned node, pierce the other side instead.
        bool pierce_source = source_set <= sink_set;
        std::vector<std::size_t> candidates = collect(pierce_source);
        if (candidates.empty()) {
            pierce_source = !pierce_source;
            candidates = collect(pierce_source);
        }
        if (candidates.empty()) return result;  // balance unsolvable; keep original assignment
        const std::vector<char>& opp = pierce_source ? snk_reach : src_reach;

        auto key = [&](std::size_t idx) {
            const NodeId v = region.nodes[idx];
            const std::uint64_t tie =
                cfg.deterministic_ties ? v : hash_mix(cfg.seed ^ (0x9e3779b97f4a7c15ull + v));
            return std::tuple<int, std::int64_t, std::uint64_t, NodeId>(
                opp[problem.node_vertex[idx]] ? 1 : 0, distance[idx], tie, v);
        };
        std::sort(candidates.begin(), candidates.end(),
                  [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

        std::size_t count = 1;
        if (single_pierces >= cfg.bulk_threshold) {
            const Weight gap = c_pair / 2 - (pierce_source ? source_set : sink_set);
            const double mean =
                pierced_nodes > 0 ? static_cast<double>(pierced_weight) / pierced_nodes : 1.0;
            const double target = static_cast<double>(std::max<Weight>(gap, 0)) / 2.0;
            count = static_cast<std::size_t>(std::llround(target / std::max(mean, 1.0)));
            count = std::clamp<std::size_t>(count, 1, candidates.size());
        }
        ++single_pierces;

        bool into_opposite = false;
        for (std::size_t c = 0; c < count; ++c) {
            const std::size_t idx = candidates[c];
            const std::int32_t vertex = problem.node_vertex[idx];
            into_opposite = into_opposite || opp[vertex] != 0;
            const Weight w = h.node_weight(region.nodes[idx]);
            if (pierce_source) {
                assigned[idx] = 1;
                solver.set_source(vertex);
                source_set += w;
            } else {
                assigned[idx] = 2;
                solver.set_sink(vertex);
                sink_set += w;
            }
            pierced_weight += w;
            ++pierced_nodes;
        }
        result.trace.back().pierced_into_opposite = into_opposite;
    }
    return result;
}

// Applies a pair solve's moves under the caller's exclusive section. Stale
// moves (node no longer in its expected block) are dropped, then the
// resulting block weights are checked against the caps before anything is
// applied. Application uses unchecked moves: a swap under tight caps has no
// per-move-feasible order, so intermediate states may transiently overload a
// block inside the exclusive section while the validated final state cannot.
// Returns the realized attributed delta; when it is negative everything is
// rolled back (the return value still reports the observed delta so callers
// can count the pair as not improved).
inline Gain apply_region_moves(PartitionedHypergraph& ph, const std::vector<Move>& moves,
                               std::mutex& mutex) {
    std::lock_guard<std::mutex> lock(mutex);
    const Hypergraph& h = ph.hypergraph();
    std::vector<Move> valid;
    for (const Move& m : moves)
        if (ph.part(m.node) == m.from) valid.push_back(m);
    if (valid.empty()) return 0;

    std::vector<Weight> hypothetical(ph.k());
    for (BlockId b = 0; b < ph.k(); ++b) hypothetical[b] = ph.block_weight(b);
    for (const Move& m : valid) {
        hypothetical[m.from] -= h.node_weight(m.node);
        hypothetical[m.to] += h.node_weight(m.node);
    }
    for (BlockId b = 0; b < ph.k(); ++b)
        if (hypothetical[b] > ph.max_block_weight(b)) return 0;

    Gain delta = 0;
    for (const Move& m : valid) delta += ph.force_move(m.node, m.from, m.to);
    if (delta < 0)
        for (auto it = valid.rbegin(); it != valid.rend(); ++it)
            ph.force_move(it->node, it->to, it->from);
    return delta;
}

// Adjacent block pairs (i < j) read from the connectivity sets.
inline std::vector<std::pair<BlockId, BlockId>> quotient_pairs(const PartitionedHypergraph& ph) {
    const std::int32_t k = ph.k();
    std::vector<char> adjacent(static_cast<std::size_t>(k) * k, 0);
    std::vector<BlockId> blocks;
    for (NetId e = 0; e < ph.hypergraph().num_nets(); ++e) {
        blocks.clear();
        ph.for_each_connected_block(e, [&](BlockId b) { blocks.push_back(b); });
        for (std::size_t x = 0; x < blocks.size(); ++x)
            for (std::size_t y = x + 1; y < blocks.size(); ++y) {
                const BlockId i = std::min(blocks[x], blocks[y]);
                const BlockId j = std::max(blocks[x], blocks[y]);
                adjacent[static_cast<std::size_t>(i) * k + j] = 1;
            }
    }
    std::vector<std::pair<BlockId, BlockId>> pairs;
    for (BlockId i = 0; i < k; ++i)
        for (BlockId j = i + 1; j < k; ++j)
            if (adjacent[static_cast<std::size_t>(i) * k + j]) pairs.emplace_back(i, j);
    return pairs;
}

struct FlowRefinementConfig {
    double alpha = 16.0;
    std::int32_t region_layers = 2;
    double tau = 1.0;
    double epsilon = 0.03;
    double min_relative_improvement = 0.001;
    int max_rounds = 10;
    int threads = 1;
    int bulk_threshold = 4;
    bool deterministic_ties = false;
    std::uint64_t seed = 0;
};

struct FlowRefinementReport {
    int rounds = 0;
    Gain improvement = 0;
    int improved_pairs = 0;
};

// Active-block scheduling: round one solves every adjacent pair in FIFO
// order; a pair that realizes an improvement reactivates both of its blocks,
// and the next round enqueues adjacent pairs with at least one active block.
// Stops when a round's relative connectivity improvement falls under the
// threshold or no block stays active. Pair solves may run concurrently (up
// to min(threads, ceil(tau * k)) workers); all mutation funnels through
// apply_region_moves' exclusive section.
inline FlowRefinementReport flow_refinement(PartitionedHypergraph& ph,
                                            const FlowRefinementConfig& cfg = {}) {
    FlowRefinementReport report;
    const std::int32_t k = ph.k();
    if (k < 2) return report;
    std::vector<char> active(k, 1);
    std::mutex apply_mutex;

    for (int round = 0; round < cfg.max_rounds; ++round) {
        const Gain before = ph.km1();
        std::vector<std::pair<BlockId, BlockId>> pairs;
        for (const auto& [i, j] : quotient_pairs(ph))
            if (active[i] || active[j]) pairs.emplace_back(i, j);
        if (pairs.empty()) break;

        std::vector<std::atomic<char>> next_active(k);
        for (auto& a : next_active) a.store(0, std::memory_order_relaxed);
        std::atomic<std::size_t> cursor{0};
        std::atomic<int> improved_pairs{0};
        const int workers = std::min(cfg.threads,
                                     std::max(1, static_cast<int>(std::ceil(cfg.tau * k))));

        par::run(workers, [&](int) {
            while (true) {
                const std::size_t p = cursor.fetch_add(1, std::memory_order_relaxed);
                if (p >= pairs.size()) break;
                const auto [i, j] = pairs[p];
                const FlowRegion region =
                    construct_region(ph, i, j, cfg.alpha, cfg.epsilon, cfg.region_layers);
                if (region.nodes.empty()) continue;
                RegionFlowProblem problem = build_region_network(ph, region);
                FlowCutterConfig fc;
                fc.cap_i = ph.max_block_weight(i);
                fc.cap_j = ph.max_block_weight(j);
                fc.bulk_threshold = cfg.bulk_threshold;
                fc.deterministic_ties = cfg.deterministic_ties;
                fc.seed = seed_with(cfg.seed, 0xf10c,
                                    (static_cast<std::uint64_t>(round) << 32) | p);
                const FlowCutterResult result = run_flowcutter(ph, region, problem, fc);
                if (!result.feasible || result.expected_delta < 0 || result.moves.empty())
                    continue;
                const Gain realized = apply_region_moves(ph, result.moves, apply_mutex);
                if (realized > 0) {
                    next_active[i].store(1, std::memory_order_relaxed);
                    next_active[j].store(1, std::memory_order_relaxed);
                    improved_pairs.fetch_add(1, std::memory_order_relaxed);
                }
            }
        });

        ++report.rounds;
        const Gain gained = before - ph.km1();
        report.improvement += gained;
        report.improved_pairs += improved_pairs.load();
        if (before == 0) break;
        if (static_cast<double>(gained) / static_cast<double>(before) <
            cfg.min_relative_improvement)
            break;
        bool any = false;
        for (BlockId b = 0; b < k; ++b) {
            active[b] = next_active[b].load();
            any = any || active[b] != 0;
        }
        if (!any) break;
    }
    return report;
}

}  // namespace hyperpart

#endif
